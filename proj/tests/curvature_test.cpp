#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>

#include "tractoria/curvature.hpp"

using namespace tractoria;

namespace {

std::map<std::string, std::string> P(std::initializer_list<std::pair<const char*, const char*>> kv) {
  std::map<std::string, std::string> m;
  for (auto& [k, v] : kv) m[k] = v;
  return m;
}

CurvatureBundle poly_bundle(int n, int seed, double eps, int deg, int degree,
                            uint64_t& st, double radius = 0.3) {
  std::map<std::string, std::string> m;
  m["n"] = std::to_string(n);
  m["seed"] = std::to_string(seed);
  m["eps"] = std::to_string(eps);
  m["deg"] = std::to_string(deg);
  auto sp = builtin_metric("poly_perturbation", m);
  std::vector<double> p(n);
  for (auto& v : p) v = radius * splitmix_unit(st);
  return curvature_bundle(sp, p, degree);
}

double rel(double x, double s) { return x / std::max(1.0, s); }

} // namespace

TEST_CASE("flat metric: everything vanishes") {
  auto spec = builtin_metric("flat", P({{"n", "4"}}));
  auto cb = curvature_bundle(spec, std::vector<double>{0.3, -1, 2, 0.5}, 6);
  CHECK(cb.gamma.max_abs() == 0.0);
  CHECK(cb.riem.max_abs() == 0.0);
  CHECK(cb.ricci.max_abs() == 0.0);
  CHECK(cb.scal.max_abs() == 0.0);
  CHECK(cb.P.max_abs() == 0.0);
  CHECK(cb.C.max_abs() == 0.0);
  CHECK(cb.cotton_t().max_abs() == 0.0);
  CHECK(cb.bach_t().max_abs() == 0.0);
}

TEST_CASE("christoffel of a conformally flat metric") {
  // Gamma^a_bc = delta^a_b Y_c + delta^a_c Y_b - delta_bc Y^a with Y = d omega
  const int n = 4;
  auto spec = builtin_metric(
      "conformally_flat", P({{"n", "4"}, {"omega", "0.1*x0 - 0.2*x1 + 0.3*x2*x3"}}));
  std::vector<double> p{0.2, -0.1, 0.4, 0.3};
  auto cb = curvature_bundle(spec, p, 2);
  ExprPtr om = parse_expr("0.1*x0 - 0.2*x1 + 0.3*x2*x3");
  double h = 1e-6;
  std::array<double, 4> ups{};
  for (int k = 0; k < n; ++k) {
    auto pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    ups[k] = (eval_expr_value(om, pp) - eval_expr_value(om, pm)) / (2 * h);
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double expect = (a == b ? ups[c] : 0.0) + (a == c ? ups[b] : 0.0) -
                        (b == c ? ups[a] : 0.0);
        CHECK(cb.gamma.value({a, b, c}) == doctest::Approx(expect).epsilon(1e-5));
      }
}

TEST_CASE("christoffel matches finite differences of the formula") {
  uint64_t st = 21;
  std::map<std::string, std::string> m{
      {"n", "4"}, {"seed", "15"}, {"eps", "0.1"}, {"deg", "3"}};
  auto spec = builtin_metric("poly_perturbation", m);
  std::vector<double> p(4);
  for (auto& v : p) v = 0.3 * splitmix_unit(st);
  auto cb = curvature_bundle(spec, p, 2);
  // assemble Gamma from finite differences of g and the pointwise inverse
  const double h = 1e-4;
  const int n = 4;
  double dg[4][4][4]; // dg[x][a][b]
  for (int x = 0; x < n; ++x)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        auto pp = p, pm = p;
        pp[x] += h;
        pm[x] -= h;
        dg[x][a][b] = (eval_expr_value(spec.entry(a, b), pp) -
                       eval_expr_value(spec.entry(a, b), pm)) /
                      (2 * h);
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0;
        for (int d = 0; d < n; ++d)
          s += 0.5 * cb.g_inv.value({a, d}) * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
        CHECK(std::fabs(cb.gamma.value({a, b, c}) - s) < 1e-6);
      }
}

TEST_CASE("covariant derivative of the metric vanishes") {
  uint64_t st = 23;
  auto cb = poly_bundle(5, 16, 0.1, 3, 3, st);
  TensorJet dg = covariant_derivative(cb.g, cb.gamma);
  CHECK(rel(dg.max_abs(), cb.g.max_abs()) < 1e-10);
}

TEST_CASE("covariant derivative of a vector field vs transport formula") {
  uint64_t st = 24;
  std::map<std::string, std::string> m{
      {"n", "4"}, {"seed", "17"}, {"eps", "0.1"}, {"deg", "2"}};
  auto spec = builtin_metric("poly_perturbation", m);
  std::vector<double> p(4);
  for (auto& v : p) v = 0.3 * splitmix_unit(st);
  auto cb = curvature_bundle(spec, p, 2);
  // v_b from closed forms so finite differences are available
  const char* comps[4] = {"sin(x0) + x1", "x0*x2", "exp(0.2*x3)", "x1*x1 - x3"};
  TensorJet v(4, 2, {Var::Lo}, 0);
  std::vector<Jet> coords;
  for (int i = 0; i < 4; ++i) coords.push_back(Jet::coordinate(4, 2, i, p[i]));
  std::vector<ExprPtr> vexpr;
  for (int b = 0; b < 4; ++b) {
    vexpr.push_back(parse_expr(comps[b]));
    Jet j = eval_expr(vexpr[b], coords);
    std::copy(j.coeffs().begin(), j.coeffs().end(), v.comp(size_t(b)).begin());
  }
  TensorJet dv = covariant_derivative(v, cb.gamma);
  const double h = 1e-4;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      auto pp = p, pm = p;
      pp[a] += h;
      pm[a] -= h;
      double fd = (eval_expr_value(vexpr[b], pp) - eval_expr_value(vexpr[b], pm)) / (2 * h);
      for (int c = 0; c < 4; ++c) fd -= cb.gamma.value({c, a, b}) * eval_expr_value(vexpr[c], p);
      CHECK(std::fabs(dv.value({a, b}) - fd) < 1e-6);
    }
}

TEST_CASE("degree exhaustion raises") {
  auto spec = builtin_metric("flat", P({{"n", "3"}}));
  auto lift = lift_metric(spec, std::vector<double>{0, 0, 0}, 0);
  CHECK_THROWS_AS(christoffel(lift.g, lift.g_inv), degree_error);
  CHECK_THROWS_AS(curvature_bundle(spec, std::vector<double>{0, 0, 0}, 1), degree_error);
}

TEST_CASE("sphere curvature closed forms") {
  uint64_t st = 25;
  for (int n : {4, 6}) {
    std::map<std::string, std::string> m{{"n", std::to_string(n)}, {"r", "1"}};
    auto spec = builtin_metric("sphere_stereo", m);
    std::vector<double> p(n);
    for (auto& v : p) v = 0.2 * splitmix_unit(st);
    auto cb = curvature_bundle(spec, p, 2);
    double gs = cb.g.max_abs_value();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        CHECK(std::fabs(cb.ricci.value({a, b}) - (n - 1) * cb.g.value({a, b})) <
              1e-8 * gs);
        for (int c = 0; c < n; ++c)
          for (int d = 0; d < n; ++d) {
            double expect = cb.g.value({a, c}) * cb.g.value({b, d}) -
                            cb.g.value({a, d}) * cb.g.value({b, c});
            CHECK(std::fabs(cb.riem_low.value({a, b, c, d}) - expect) < 1e-8 * gs * gs);
          }
      }
    CHECK(std::fabs(cb.scal.value() - n * (n - 1)) < 1e-8 * n * n);
    CHECK(std::fabs(cb.J.value() - n / 2.0) < 1e-8 * n);
  }
}

TEST_CASE("first Bianchi identity") {
  uint64_t st = 26;
  auto cb = poly_bundle(5, 18, 0.1, 3, 2, st);
  std::array<int, 3> abc{0, 1, 2};
  CHECK(rel(antisymmetrize(cb.riem_low, abc).max_abs(), cb.riem_low.max_abs()) < 1e-9);
}

TEST_CASE("ricci symmetry and schouten trace") {
  uint64_t st = 27;
  auto cb = poly_bundle(5, 19, 0.1, 3, 2, st);
  CHECK(rel(sym_residual(cb.ricci, 0, 1), cb.ricci.max_abs()) < 1e-10);
  // g^{ab} P_ab = J
  TensorJet pr = raise_slot(cb.P, 0, cb.g_inv);
  TensorJet tr = contract_slots(pr, 0, 1);
  Jet diff = tr.component_jet(std::span<const int>{});
  diff -= cb.J;
  CHECK(rel(diff.max_abs(), cb.J.max_abs()) < 1e-10);
  // Ric = (n-2) P + J g reconstructs exactly
  TensorJet recon = cb.P * double(5 - 2);
  recon += mul_scalar(cb.g.truncated(cb.P.degree()), cb.J);
  TensorJet d = recon - cb.ricci;
  CHECK(rel(d.max_abs(), cb.ricci.max_abs()) < 1e-12);
}

TEST_CASE("weyl is trace-free and vanishes conformally flat") {
  uint64_t st = 28;
  auto cb = poly_bundle(5, 20, 0.1, 3, 2, st);
  double scale = std::max(1.0, cb.C.max_abs());
  CHECK(rel(trace_residual(cb.C, 0, 2, cb.g_inv), scale) < 1e-9);
  CHECK(rel(trace_residual(cb.C, 1, 3, cb.g_inv), scale) < 1e-9);
  CHECK(rel(trace_residual(cb.C, 0, 3, cb.g_inv), scale) < 1e-9);

  auto cf = builtin_metric(
      "conformally_flat", P({{"n", "5"}, {"omega", "0.2*x0 - 0.1*x1*x4 + 0.05*x2"}}));
  auto cb2 = curvature_bundle(cf, std::vector<double>{0.1, 0.2, -0.1, 0.3, 0.0}, 2);
  CHECK(rel(cb2.C.max_abs(), cb2.riem_low.max_abs()) < 1e-8);
  // n = 3 returns the zero tensor
  auto cb3 = curvature_bundle(builtin_metric("sphere_stereo", P({{"n", "3"}, {"r", "2"}})),
                              std::vector<double>{0.1, 0, -0.1}, 2);
  CHECK(cb3.C.max_abs() == 0.0);
}

TEST_CASE("cotton vanishes on Einstein metrics") {
  uint64_t st = 29;
  auto spec = builtin_metric("einstein_product", P({{"p", "2"}, {"q", "4"}}));
  std::vector<double> p(6);
  for (auto& v : p) v = 0.15 * splitmix_unit(st);
  auto cb = curvature_bundle(spec, p, 3);
  CHECK(rel(cb.cotton_t().max_abs(), cb.P.max_abs()) < 1e-9);
}

TEST_CASE("bach on the sphere vanishes") {
  auto spec = builtin_metric("sphere_stereo", P({{"n", "5"}, {"r", "1"}}));
  auto cb = curvature_bundle(spec, std::vector<double>{0.1, 0, 0.2, -0.1, 0}, 4);
  CHECK(rel(cb.bach_t().max_abs(), 1.0) < 1e-8);
}

TEST_CASE("declared symmetry hints hold") {
  uint64_t st = 31;
  auto cb = poly_bundle(5, 22, 0.1, 3, 4, st);
  CHECK(rel(hint_residual(cb.g, cb.g_inv), 1.0) < 1e-12);
  CHECK(rel(hint_residual(cb.P, cb.g_inv), cb.P.max_abs()) < 1e-10);
  CHECK(rel(hint_residual(cb.C, cb.g_inv), cb.C.max_abs()) < 1e-10);
  CHECK(rel(hint_residual(cb.cotton_t(), cb.g_inv), cb.cotton_t().max_abs()) < 1e-10);
  CHECK(rel(hint_residual(cb.bach_t(), cb.g_inv), cb.bach_t().max_abs()) < 1e-10);
}

TEST_CASE("total order bookkeeping") {
  uint64_t st = 30;
  auto cb = poly_bundle(4, 21, 0.1, 2, 3, st);
  CHECK(cb.g.total_order() == 0);
  CHECK(cb.riem_low.total_order() == 2);
  CHECK(cb.ricci.total_order() == 2);
  CHECK(cb.P.total_order() == 2);
  CHECK(cb.C.total_order() == 2);
  CHECK(cb.cotton_t().total_order() == 3);
  // covariant derivative raises total order by one
  TensorJet dp = covariant_derivative(cb.P, cb.gamma);
  CHECK(dp.total_order() == cb.P.total_order() + 1);
  // raising with the inverse representative preserves total order
  TensorJet praised = raise_slot(cb.P, 0, cb.g_inv);
  CHECK(praised.total_order() == cb.P.total_order());
}
