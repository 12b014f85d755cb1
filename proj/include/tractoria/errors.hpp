#ifndef TRACTORIA_ERRORS_HPP
#define TRACTORIA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tractoria {

// Bad input from the user or the caller: malformed expressions, shape
// mismatches, unknown names. CLI maps these to exit code 2.
class usage_error : public std::runtime_error {
public:
  explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failure with position info (1-based line/column).
class parse_error : public usage_error {
public:
  parse_error(const std::string& msg, int line, int column)
      : usage_error(msg + " (line " + std::to_string(line) + ", column " +
                    std::to_string(column) + ")"),
        line(line), column(column) {}
  int line;
  int column;
};

// Numerical failure: singular metric, domain error in an analytic
// function, jet degree exhausted. CLI maps these to exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A derivative was requested that the truncation order cannot supply.
class degree_error : public numeric_error {
public:
  explicit degree_error(const std::string& msg) : numeric_error(msg) {}
};

} // namespace tractoria

#endif
