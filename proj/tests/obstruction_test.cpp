#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "tractoria/obstruction.hpp"

using namespace tractoria;

namespace {

CurvatureBundle named_bundle(const char* name,
                             std::map<std::string, std::string> params, int degree,
                             uint64_t& st, double radius) {
  auto spec = builtin_metric(name, params);
  std::vector<double> p(spec.dim);
  for (auto& v : p) v = radius * splitmix_unit(st);
  return curvature_bundle(spec, p, degree);
}

double rel(double x, double s) { return x / std::max(1.0, s); }

} // namespace

TEST_CASE("extraction constants") {
  CHECK(kn_constant(4) == -8.0);
  CHECK(kn_constant(6) == 64.0);
  CHECK(kn_constant(8) == -1536.0);
  CHECK_THROWS_AS(kn_constant(5), usage_error);
}

TEST_CASE("flat metrics have zero obstruction in every dimension") {
  uint64_t st = 90;
  for (int n : {4, 6}) {
    auto cb = named_bundle("flat", {{"n", std::to_string(n)}}, n, st, 0.4);
    auto r = obstruction_direct(cb);
    CHECK(r.B.max_abs() == 0.0);
    if (n == 6) {
      auto rt = obstruction_tractor(cb);
      CHECK(rt.B.max_abs() < 1e-15);
    }
  }
}

TEST_CASE("dimension dispatch and degree policing") {
  uint64_t st = 91;
  auto cb5 = named_bundle("flat", {{"n", "5"}}, 5, st, 0.2);
  CHECK_THROWS_AS(obstruction_direct(cb5), usage_error);
  auto cb6 = named_bundle("flat", {{"n", "6"}}, 4, st, 0.2);
  CHECK_THROWS_AS(obstruction6_direct(cb6), degree_error);
  CHECK_THROWS_AS(obstruction6_tractor(cb6), degree_error);
}

TEST_CASE("dim-4 obstruction is minus half the Bach tensor") {
  uint64_t st = 92;
  std::map<std::string, std::string> m{
      {"n", "4"}, {"seed", "5"}, {"eps", "0.1"}, {"deg", "3"}};
  auto cb = named_bundle("poly_perturbation", m, 5, st, 0.3);
  auto r = obstruction4(cb);
  TensorJet expect = cb.bach_t() * (-0.5);
  TensorJet d = r.B - expect;
  CHECK(d.max_abs() == 0.0);
  CHECK(*r.divergence_residual < 1e-6 * r.scale);
  CHECK(r.trace_residual < 1e-8 * r.scale);
}

TEST_CASE("conformally flat vanishing") {
  uint64_t st = 93;
  std::map<std::string, std::string> m4{{"n", "4"}, {"omega", "0.1*x0 - 0.06*x1*x3"}};
  auto cb4 = named_bundle("conformally_flat", m4, 4, st, 0.3);
  auto r4 = obstruction4(cb4);
  CHECK(rel(r4.B.max_abs(), r4.scale) < 1e-7);

  std::map<std::string, std::string> m6{{"n", "6"}, {"omega", "0.1*x0 - 0.04*x1*x5"}};
  auto cb6 = named_bundle("conformally_flat", m6, 6, st, 0.25);
  auto r6 = obstruction6_direct(cb6);
  CHECK(rel(r6.B.max_abs(), r6.scale) < 1e-6);
  auto r6t = obstruction6_tractor(cb6);
  CHECK(rel(r6t.B.max_abs(), r6t.scale) < 1e-6);
}

TEST_CASE("einstein product: obstruction vanishes, Weyl does not") {
  uint64_t st = 94;
  auto cb = named_bundle("einstein_product", {{"p", "2"}, {"q", "4"}}, 6, st, 0.15);
  CHECK(cb.C.max_abs_value() > 0.1 * std::max(1.0, cb.riem_low.max_abs_value()));
  auto r = obstruction6_direct(cb);
  CHECK(rel(r.B.max_abs(), r.scale) < 1e-7);
  auto rt = obstruction6_tractor(cb);
  CHECK(rel(rt.B.max_abs(), rt.scale) < 1e-7);
}

TEST_CASE("dim-6 cross-route agreement with diagnostics") {
  uint64_t st = 95;
  std::map<std::string, std::string> m{
      {"n", "6"}, {"seed", "12"}, {"eps", "0.05"}, {"deg", "3"}};
  auto cb = named_bundle("poly_perturbation", m, 6, st, 0.25);
  auto r1 = obstruction6_direct(cb);
  auto r2 = obstruction6_tractor(cb);
  CHECK(r1.B.max_abs() > 1e-4); // non-trivial input
  TensorJet d = r1.B - r2.B;
  CHECK(rel(d.max_abs(), std::max(r1.scale, r2.scale)) < 1e-6);
  CHECK(rel(*r2.upper_slot_residual, r2.scale) < 1e-6);
  CHECK(rel(r1.trace_residual, r1.scale) < 1e-8);
  CHECK(rel(r1.symmetry_residual, r1.scale) < 1e-8);
}

TEST_CASE("divergence of the dim-6 obstruction") {
  uint64_t st = 96;
  std::map<std::string, std::string> m{
      {"n", "6"}, {"seed", "13"}, {"eps", "0.05"}, {"deg", "3"}};
  auto cb = named_bundle("poly_perturbation", m, 7, st, 0.25);
  auto r = obstruction6_direct(cb);
  REQUIRE(r.divergence_residual.has_value());
  CHECK(rel(*r.divergence_residual, r.scale) < 1e-6);
}

TEST_CASE("dim-6 leading term for tiny perturbations") {
  // the perturbation needs nonvanishing sixth derivatives, so its entries
  // carry polynomial degree 6
  uint64_t st = 97;
  std::map<std::string, std::string> m{
      {"n", "6"}, {"seed", "3"}, {"eps", "0.001"}, {"deg", "6"}, {"terms", "40"}};
  auto cb = named_bundle("poly_perturbation", m, 6, st, 0.2);
  auto r = obstruction6_direct(cb);
  TensorJet lead = dim6_leading_term(cb);
  TensorJet d = r.B.truncated(0) - lead;
  double norm = r.B.max_abs_value();
  REQUIRE(norm > 0);
  CHECK(d.max_abs_value() / norm < 0.05);
}

// The full dim-8 pair runs in the acceptance suite; here a flat-space
// smoke test keeps the 87-term table and the dim-8 tractor plumbing honest.
TEST_CASE("dim-8 routes on flat space") {
  auto spec = builtin_metric("flat", {{"n", "8"}});
  std::vector<double> p(8, 0.05);
  auto cb = curvature_bundle(spec, p, 8);
  auto r1 = obstruction8_direct(cb);
  CHECK(r1.B.max_abs() == 0.0);
  auto r2 = obstruction8_tractor(cb);
  CHECK(r2.B.max_abs() < 1e-15);
  CHECK(*r2.upper_slot_residual < 1e-15);
}
