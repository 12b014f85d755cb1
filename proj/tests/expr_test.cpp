#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractoria/expr.hpp"
#include "tractoria/metric.hpp"

using namespace tractoria;

namespace {
double eval_at(const std::string& s, std::vector<double> p) {
  return eval_expr_value(parse_expr(s), p);
}
} // namespace

TEST_CASE("constants and literals") {
  CHECK(eval_at("1", {}) == 1.0);
  CHECK(eval_at("2.5e-1", {}) == doctest::Approx(0.25));
  CHECK(eval_at("1 + 2*3", {}) == 7.0);
  CHECK(eval_at("(1 + 2)*3", {}) == 9.0);
  CHECK(eval_at("4/2/2", {}) == 1.0);
  CHECK(eval_at("2^3", {}) == 8.0);
  CHECK(eval_at("-2^2", {}) == 4.0); // unary minus binds tighter than the caret
  CHECK(eval_at("2*x0^2", {3}) == 18.0);
}

TEST_CASE("stereographic-style entry") {
  auto e = parse_expr("4/pow(1 + x0*x0 + x1*x1, 2)");
  CHECK(eval_expr_value(e, std::vector<double>{0.0, 0.0}) == doctest::Approx(4.0));
  CHECK(eval_expr_value(e, std::vector<double>{1.0, 0.0}) == doctest::Approx(1.0));
}

TEST_CASE("functions") {
  CHECK(eval_at("exp(0)", {}) == 1.0);
  CHECK(eval_at("log(exp(2))", {}) == doctest::Approx(2.0));
  CHECK(eval_at("sin(0) + cos(0)", {}) == doctest::Approx(1.0));
  CHECK(eval_at("sqrt(x0)", {9}) == doctest::Approx(3.0));
  CHECK(eval_at("pow(x0, -1)", {4}) == doctest::Approx(0.25));
  CHECK(eval_at("pow(x0, 0.5)", {4}) == doctest::Approx(2.0));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_expr("exp(");
    FAIL("expected parse error");
  } catch (const parse_error& e) {
    CHECK(e.column == 4);
    CHECK(e.line == 1);
  }
  CHECK_THROWS_AS(parse_expr("frob(x0)"), parse_error);
  CHECK_THROWS_AS(parse_expr("1 + + *"), parse_error);
  CHECK_THROWS_AS(parse_expr("1 2"), parse_error);
  CHECK_THROWS_AS(parse_expr("pow(x0)"), parse_error);
}

TEST_CASE("round trip through the printer") {
  uint64_t st = 5;
  const char* samples[] = {
      "1 + x0*x1 - 3*x2",
      "4/pow(1 + x0*x0 + x1*x1, 2)",
      "exp(2*x0)*sin(x1) - sqrt(1 + x2*x2)",
      "-x0^2 + pow(x1 + 1, -3)",
  };
  for (const char* s : samples) {
    ExprPtr e1 = parse_expr(s);
    ExprPtr e2 = parse_expr(print_expr(e1));
    CHECK(expr_equal(e1, e2));
    // lifted jets are coefficient-identical
    std::vector<Jet> coords;
    for (int i = 0; i < 3; ++i)
      coords.push_back(Jet::coordinate(3, 3, i, 0.3 * splitmix_unit(st)));
    Jet j1 = eval_expr(e1, coords);
    Jet j2 = eval_expr(e2, coords);
    for (size_t k = 0; k < j1.coeffs().size(); ++k)
      CHECK(j1.coeffs()[k] == j2.coeffs()[k]);
  }
}

TEST_CASE("coordinate bounds checked") {
  auto e = parse_expr("x5");
  CHECK(max_coord(e) == 5);
  std::vector<Jet> coords{Jet::coordinate(2, 2, 0, 0), Jet::coordinate(2, 2, 1, 0)};
  CHECK_THROWS_AS(eval_expr(e, coords), usage_error);
}

TEST_CASE("jet evaluation matches point evaluation") {
  auto e = parse_expr("exp(0.3*x0)*cos(x1) + x0/pow(1 + x1*x1, 2)");
  std::vector<double> p{0.4, -0.7};
  std::vector<Jet> coords{Jet::coordinate(2, 4, 0, p[0]), Jet::coordinate(2, 4, 1, p[1])};
  Jet j = eval_expr(e, coords);
  CHECK(j.value() == doctest::Approx(eval_expr_value(e, p)).epsilon(1e-12));
  double h = 1e-4;
  for (int k = 0; k < 2; ++k) {
    auto pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    double fd = (eval_expr_value(e, pp) - eval_expr_value(e, pm)) / (2 * h);
    MultiIndex al(2, 0);
    al[k] = 1;
    CHECK(std::fabs(derivative_value(j, al) - fd) < 1e-6);
  }
}
