#ifndef TRACTORIA_VERIFY_HPP
#define TRACTORIA_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace tractoria {

struct CheckResult {
  std::string name;
  std::string identity; // the mathematical statement being verified
  int criterion = 0;    // acceptance criterion this check belongs to (0 = extra)
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double seconds = 0.0;
  std::string note;
};

struct VerifyReport {
  std::string suite;
  uint64_t seed = 0;
  std::vector<CheckResult> checks;
  double seconds = 0.0;
  bool all_pass() const {
    for (auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// suites: "fast" (everything but the heavy dimension-8 runs),
// "dim8" (the dimension-8 battery), "full" (both)
VerifyReport run_verify(const std::string& suite, uint64_t seed);

} // namespace tractoria

#endif
