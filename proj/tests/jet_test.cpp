#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractoria/jet.hpp"
#include "tractoria/metric.hpp"

using namespace tractoria;

namespace {

Jet random_jet(int dim, int degree, uint64_t& st) {
  Jet j = Jet::constant(dim, degree, 0.0);
  for (double& c : j.coeffs()) c = splitmix_unit(st);
  return j;
}

// brute-force polynomial multiply-then-truncate oracle
Jet poly_mul_oracle(const Jet& a, const Jet& b) {
  int deg = std::min(a.degree(), b.degree());
  Jet out = Jet::constant(a.dim(), deg, 0.0);
  const auto& sa = a.space();
  const auto& sb = b.space();
  std::vector<int> sum(a.dim());
  for (int i = 0; i < sa.size(); ++i)
    for (int j = 0; j < sb.size(); ++j) {
      auto ea = sa.exponent(i);
      auto eb = sb.exponent(j);
      int total = 0;
      for (int k = 0; k < a.dim(); ++k) {
        sum[k] = ea[k] + eb[k];
        total += sum[k];
      }
      if (total > deg) continue;
      int t = out.space().index_of(sum);
      out.coeffs()[t] += a.coeffs()[i] * b.coeffs()[j];
    }
  return out;
}

double max_diff(const Jet& a, const Jet& b) {
  double m = 0;
  for (size_t k = 0; k < a.coeffs().size(); ++k)
    m = std::max(m, std::fabs(a.coeffs()[k] - b.coeffs()[k]));
  return m;
}

} // namespace

TEST_CASE("product of binomials") {
  // (1+x)(1+y) at degree 2 in two variables
  Jet x = Jet::coordinate(2, 2, 0, 0.0);
  Jet y = Jet::coordinate(2, 2, 1, 0.0);
  Jet p = (x + 1.0) * (y + 1.0);
  CHECK(p.coeff({0, 0}) == 1.0);
  CHECK(p.coeff({1, 0}) == 1.0);
  CHECK(p.coeff({0, 1}) == 1.0);
  CHECK(p.coeff({1, 1}) == 1.0);
  CHECK(p.coeff({2, 0}) == 0.0);
}

TEST_CASE("truncation drops the quadratic part") {
  Jet x = Jet::coordinate(1, 1, 0, 0.0);
  Jet p = x * x;
  CHECK(p.degree() == 1);
  CHECK(p.max_abs() == 0.0);
}

TEST_CASE("random products match the brute-force oracle") {
  uint64_t st = 42;
  for (int rep = 0; rep < 3; ++rep) {
    Jet a = random_jet(3, 4, st);
    Jet b = random_jet(3, 4, st);
    Jet p = a * b;
    Jet q = poly_mul_oracle(a, b);
    CHECK(max_diff(p, q) < 1e-13);
  }
}

TEST_CASE("ring axioms under truncation") {
  uint64_t st = 7;
  Jet a = random_jet(3, 4, st), b = random_jet(3, 4, st), c = random_jet(3, 4, st);
  CHECK(max_diff((a * b) * c, a * (b * c)) < 1e-12);
  CHECK(max_diff(a * (b + c), a * b + a * c) < 1e-12);
}

TEST_CASE("exp jet") {
  Jet x = Jet::coordinate(1, 3, 0, 0.0);
  Jet e = apply_analytic(AnalyticFn::Exp, x);
  CHECK(e.coeff({0}) == doctest::Approx(1.0));
  CHECK(e.coeff({1}) == doctest::Approx(1.0));
  CHECK(e.coeff({2}) == doctest::Approx(0.5));
  CHECK(e.coeff({3}) == doctest::Approx(1.0 / 6));
}

TEST_CASE("sin at pi/2") {
  Jet x = Jet::coordinate(1, 2, 0, M_PI_2);
  Jet s = apply_analytic(AnalyticFn::Sin, x);
  CHECK(s.coeff({0}) == doctest::Approx(1.0));
  CHECK(s.coeff({1}) == doctest::Approx(0.0));
  CHECK(s.coeff({2}) == doctest::Approx(-0.5));
}

TEST_CASE("geometric series from pow(-1)") {
  Jet x = Jet::coordinate(1, 2, 0, 0.0);
  Jet r = jet_pow(x + 1.0, -1.0);
  CHECK(r.coeff({0}) == doctest::Approx(1.0));
  CHECK(r.coeff({1}) == doctest::Approx(-1.0));
  CHECK(r.coeff({2}) == doctest::Approx(1.0));
}

TEST_CASE("exp(a) exp(-a) = 1") {
  uint64_t st = 11;
  Jet a = random_jet(2, 5, st);
  Jet p = apply_analytic(AnalyticFn::Exp, a) * apply_analytic(AnalyticFn::Exp, -a);
  Jet one = Jet::constant(2, 5, 1.0);
  CHECK(max_diff(p, one) < 1e-10);
}

TEST_CASE("analytic domain errors") {
  Jet bad = Jet::constant(1, 2, -1.0);
  CHECK_THROWS_AS(apply_analytic(AnalyticFn::Log, bad), numeric_error);
  CHECK_THROWS_AS(jet_pow(bad, 0.5), numeric_error);
  Jet zero = Jet::constant(1, 2, 0.0);
  CHECK_THROWS_AS(jet_pow(zero, -1.0), numeric_error);
  CHECK(jet_pow(bad, 2.0).coeff({0}) == doctest::Approx(1.0)); // integer power is fine
}

TEST_CASE("partial derivative") {
  // d/dx (1 + x + x y) = 1 + y
  Jet x = Jet::coordinate(2, 2, 0, 0.0);
  Jet y = Jet::coordinate(2, 2, 1, 0.0);
  Jet f = x + x * y + 1.0;
  Jet d = partial(f, 0);
  CHECK(d.degree() == 1);
  CHECK(d.coeff({0, 0}) == 1.0);
  CHECK(d.coeff({0, 1}) == 1.0);
  CHECK(partial(Jet::constant(2, 3, 5.0), 1).max_abs() == 0.0);
  CHECK_THROWS_AS(partial(Jet::constant(2, 0, 1.0), 0), degree_error);
}

TEST_CASE("mixed partials commute exactly") {
  uint64_t st = 13;
  Jet a = random_jet(3, 5, st);
  Jet d01 = partial(partial(a, 0), 1);
  Jet d10 = partial(partial(a, 1), 0);
  CHECK(max_diff(d01, d10) == 0.0);
}

TEST_CASE("derivative values") {
  // f = 1 + 3 x^2: f'' = 6
  Jet x = Jet::coordinate(1, 2, 0, 0.0);
  Jet f = x * x * 3.0 + 1.0;
  CHECK(derivative_value(f, {2}) == doctest::Approx(6.0));
  CHECK(derivative_value(f, {0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(derivative_value(f, {3}), degree_error);
}

TEST_CASE("derivative values match finite differences of a polynomial") {
  // f(x,y) = 2 + x - 3 y + 0.5 x^2 y at a generic base point
  auto fval = [](double x, double y) { return 2 + x - 3 * y + 0.5 * x * x * y; };
  double px = 0.3, py = -0.2, h = 1e-3;
  Jet x = Jet::coordinate(2, 4, 0, px);
  Jet y = Jet::coordinate(2, 4, 1, py);
  Jet f = x * x * y * 0.5 + x - y * 3.0 + 2.0;
  double fd_x = (fval(px + h, py) - fval(px - h, py)) / (2 * h);
  double fd_xy = (fval(px + h, py + h) - fval(px + h, py - h) -
                  fval(px - h, py + h) + fval(px - h, py - h)) /
                 (4 * h * h);
  CHECK(std::fabs(derivative_value(f, {1, 0}) - fd_x) < 1e-6 * std::max(1.0, fd_x));
  CHECK(std::fabs(derivative_value(f, {1, 1}) - fd_xy) < 1e-6);
}

TEST_CASE("dimension mismatch is rejected") {
  Jet a = Jet::constant(2, 2, 1.0);
  Jet b = Jet::constant(3, 2, 1.0);
  CHECK_THROWS_AS(a * b, usage_error);
}
