#include "tractoria/verify.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "tractoria/defcomplex.hpp"
#include "tractoria/obstruction.hpp"
#include "tractoria/parallel.hpp"
#include "tractoria/tractor.hpp"

namespace tractoria {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_point(int n, uint64_t& st, double radius) {
  std::vector<double> p(n);
  for (double& v : p) v = radius * splitmix_unit(st);
  return p;
}

MetricSpec poly_metric(int n, uint64_t seed, double eps, int deg, int terms = 0,
                       int entries = 0) {
  std::map<std::string, std::string> p;
  p["n"] = std::to_string(n);
  p["seed"] = std::to_string(seed % 100000);
  p["eps"] = std::to_string(eps);
  p["deg"] = std::to_string(deg);
  if (terms) p["terms"] = std::to_string(terms);
  if (entries) p["entries"] = std::to_string(entries);
  return builtin_metric("poly_perturbation", p);
}

ConformalFactor test_omega(int n) {
  // fixed nontrivial polynomial conformal factor
  std::string s = "0.07*x0 - 0.05*x1 + 0.04*x0*x1";
  if (n >= 3) s += " + 0.03*x2*x2";
  if (n >= 4) s += " - 0.02*x0*x3";
  return ConformalFactor{parse_expr(s)};
}

TractorJet random_tractor(int n, int valence, int weight, int degree, uint64_t& st) {
  TractorJet v(n, valence, weight, degree);
  std::vector<std::string> words;
  std::function<void(std::string)> gen = [&](std::string w) {
    if (int(w.size()) == valence) {
      words.push_back(w);
      return;
    }
    for (char c : {'Y', 'Z', 'X'}) gen(w + c);
  };
  gen("");
  for (auto& w : words) {
    TensorJet t(n, degree, v.component_vars(w), 0);
    for (auto& x : t.raw()) x = splitmix_unit(st);
    v.accumulate(w, t);
  }
  return v;
}

struct Battery {
  uint64_t seed;
  std::vector<std::pair<std::string, std::function<void(CheckResult&)>>> items;
  std::vector<CheckResult> results;

  uint64_t stream(const std::string& name) const {
    uint64_t h = seed * 0x9E3779B97F4A7C15ull + 0x243F6A8885A308D3ull;
    for (char c : name) h = (h ^ uint64_t(uint8_t(c))) * 0x100000001B3ull;
    return h;
  }

  void add(const std::string& name, const std::string& identity, int criterion,
           double tol, std::function<double(uint64_t&, std::string&)> fn) {
    items.push_back({name, [=, this](CheckResult& r) {
                       r.name = name;
                       r.identity = identity;
                       r.criterion = criterion;
                       r.tolerance = tol;
                       uint64_t st = stream(name);
                       auto t0 = Clock::now();
                       try {
                         r.residual = fn(st, r.note);
                         r.pass = r.residual <= tol;
                       } catch (const std::exception& e) {
                         r.pass = false;
                         r.residual = std::nan("");
                         r.note = e.what();
                       }
                       r.seconds = elapsed(t0);
                     }});
  }

  void add(const std::string& name, const std::string& identity, int criterion,
           double tol, std::function<double(uint64_t&)> fn) {
    add(name, identity, criterion, tol,
        [fn](uint64_t& st, std::string&) { return fn(st); });
  }

  void run() {
    results.assign(items.size(), {});
    std::atomic<size_t> next{0};
    int nt = std::min<int>(max_threads(), int(items.size()));
    auto worker = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= items.size()) return;
        items[i].second(results[i]);
      }
    };
    std::vector<std::thread> ths;
    for (int t = 1; t < nt; ++t) ths.emplace_back(worker);
    worker();
    for (auto& t : ths) t.join();
  }
};

double rel(double resid, double scale) { return resid / std::max(1.0, scale); }

// largest relative deviation between two (0,2) tensors against a scale
double tensor_diff(const TensorJet& a, const TensorJet& b, double scale) {
  TensorJet d = a - b;
  return rel(d.max_abs(), scale);
}

// least-squares proportionality a ~ ratio * b; reported when the two
// obstruction routes disagree so a constant mismatch is visible as such
double route_ratio(const TensorJet& a, const TensorJet& b) {
  double num = 0, den = 0;
  for (size_t c = 0; c < a.ncomp(); ++c) {
    num += a.comp(c)[0] * b.comp(c)[0];
    den += b.comp(c)[0] * b.comp(c)[0];
  }
  return den > 0 ? num / den : 0.0;
}

// ------------------------------------------------------------ the checks

void add_fast_checks(Battery& bt) {
  // --- criterion 10: jet engine / pipeline basics
  bt.add("flat-pipeline-zero", "all curvature tensors vanish identically on flat space",
         10, 1e-12, [](uint64_t& st) {
           auto spec = builtin_metric("flat", {{"n", "6"}});
           auto p = random_point(6, st, 0.5);
           auto cb = curvature_bundle(spec, p, 6);
           double m = std::max({cb.riem.max_abs(), cb.ricci.max_abs(), cb.scal.max_abs(),
                                cb.P.max_abs(), cb.C.max_abs(), cb.cotton_t().max_abs(),
                                cb.bach_t().max_abs()});
           return m;
         });

  bt.add("metric-fd", "lifted metric jets match central finite differences", 10, 1e-5,
         [](uint64_t& st) {
           const int n = 4;
           auto spec = poly_metric(n, 77, 0.1, 3);
           auto p = random_point(n, st, 0.3);
           auto lift = lift_metric(spec, p, 2);
           const double h = 1e-3;
           double worst = 0;
           for (int i = 0; i < n; ++i)
             for (int j = 0; j < n; ++j) {
               Jet gij = lift.g.component_jet(std::array<int, 2>{i, j});
               for (int k = 0; k < n; ++k) {
                 auto pp = p, pm = p;
                 pp[k] += h;
                 pm[k] -= h;
                 double fd =
                     (eval_expr_value(spec.entry(i, j), pp) -
                      eval_expr_value(spec.entry(i, j), pm)) /
                     (2 * h);
                 MultiIndex al(n, 0);
                 al[k] = 1;
                 worst = std::max(worst, std::fabs(fd - derivative_value(gij, al)));
                 double f0 = eval_expr_value(spec.entry(i, j), p);
                 double fp = eval_expr_value(spec.entry(i, j), pp);
                 double fm = eval_expr_value(spec.entry(i, j), pm);
                 MultiIndex al2(n, 0);
                 al2[k] = 2;
                 worst = std::max(
                     worst, std::fabs((fp - 2 * f0 + fm) / (h * h) -
                                      derivative_value(gij, al2)));
               }
             }
           return worst;
         });

  bt.add("sphere-closed-forms",
         "round-sphere curvature: R = g*g - g*g, Ric = (n-1)g, Sc = n(n-1), P = g/2",
         10, 1e-8, [](uint64_t& st) {
           double worst = 0;
           for (int n : {4, 6}) {
             auto spec = builtin_metric("sphere_stereo",
                                        {{"n", std::to_string(n)}, {"r", "1"}});
             auto p = random_point(n, st, 0.2);
             auto cb = curvature_bundle(spec, p, 2);
             double scale = std::max(1.0, cb.g.max_abs());
             // R_abcd = g_ac g_bd - g_ad g_bc
             TensorJet expect(n, 0, {Var::Lo, Var::Lo, Var::Lo, Var::Lo}, 2);
             TensorJet g0 = cb.g.truncated(0);
             for (int a = 0; a < n; ++a)
               for (int b = 0; b < n; ++b)
                 for (int c = 0; c < n; ++c)
                   for (int d = 0; d < n; ++d)
                     expect.comp({a, b, c, d})[0] =
                         g0.value({a, c}) * g0.value({b, d}) -
                         g0.value({a, d}) * g0.value({b, c});
             TensorJet rl = cb.riem_low.truncated(0);
             worst = std::max(worst, tensor_diff(rl, expect, scale * scale));
             TensorJet ric_exp = g0 * double(n - 1);
             worst = std::max(worst, tensor_diff(cb.ricci.truncated(0), ric_exp, scale));
             worst = std::max(worst,
                              rel(std::fabs(cb.scal.value() - n * (n - 1.0)), 1.0));
             TensorJet p_exp = g0 * 0.5;
             worst = std::max(worst, tensor_diff(cb.P.truncated(0), p_exp, scale));
             worst = std::max(worst, rel(std::fabs(cb.J.value() - n / 2.0), 1.0));
           }
           return worst;
         });

  bt.add("riemann-bianchi1", "first Bianchi identity of the lowered Riemann tensor", 10,
         1e-9, [](uint64_t& st) {
           auto spec = poly_metric(5, 31, 0.1, 3);
           auto p = random_point(5, st, 0.3);
           auto cb = curvature_bundle(spec, p, 2);
           std::array<int, 3> first3{0, 1, 2};
           return rel(antisymmetrize(cb.riem_low, first3).max_abs(),
                      cb.riem_low.max_abs());
         });

  bt.add("contracted-bianchi2", "div Ric = (1/2) grad Sc", 10, 1e-8, [](uint64_t& st) {
    auto spec = poly_metric(5, 32, 0.1, 3);
    auto p = random_point(5, st, 0.3);
    auto cb = curvature_bundle(spec, p, 3);
    TensorJet div = divergence_slot(cb.ricci, 0, cb.gamma, cb.g_inv);
    TensorJet sc(5, cb.scal.degree(), {}, -2);
    std::copy(cb.scal.coeffs().begin(), cb.scal.coeffs().end(),
              sc.comp(size_t(0)).begin());
    TensorJet dsc = covariant_derivative(sc, cb.gamma);
    dsc *= 0.5;
    return tensor_diff(div, dsc.truncated(div.degree()),
                       std::max(1.0, dsc.max_abs()));
  });

  // --- criterion 3: dimension-4 Bach routes
  bt.add("bach-two-routes-dim4",
         "div div C + (1/2) Ric C equals div Cotton + P C in dimension 4", 3, 1e-7,
         [](uint64_t& st) {
           double worst = 0;
           for (int k = 0; k < 5; ++k) {
             auto spec = poly_metric(4, 900 + k, 0.08, 3);
             auto p = random_point(4, st, 0.3);
             auto cb = curvature_bundle(spec, p, 4);
             // route 1: grad^c grad^d C_acbd + 1/2 Ric^cd C_acbd
             TensorJet d2 = covariant_derivative(
                 covariant_derivative(cb.C, cb.gamma), cb.gamma);
             TensorJet ginv = cb.g_inv.truncated(d2.degree());
             TensorJet d2r = raise_slot(raise_slot(d2, 0, ginv), 1, ginv);
             TensorJet ricr =
                 raise_slot(raise_slot(cb.ricci.truncated(d2.degree()), 0, ginv), 1,
                            ginv);
             TensorJet ct = cb.C.truncated(d2.degree());
             const int n = 4;
             TensorJet r1(n, d2.degree(), {Var::Lo, Var::Lo}, -2);
             for (int a = 0; a < n; ++a)
               for (int b = 0; b < n; ++b) {
                 auto dst = r1.comp({a, b});
                 for (int c = 0; c < n; ++c)
                   for (int d = 0; d < n; ++d) {
                     // grad^c grad^d C_acbd: inner grad_d first
                     auto src = d2r.comp({c, d, a, c, b, d});
                     for (size_t q = 0; q < dst.size(); ++q) dst[q] += src[q];
                     Jet tmp(r1.space_ptr());
                     jet_mul_acc(r1.space(), r1.degree(), tmp.coeffs(),
                                 ricr.comp({c, d}), ct.comp({a, c, b, d}));
                     for (size_t q = 0; q < dst.size(); ++q)
                       dst[q] += 0.5 * tmp.coeffs()[q];
                   }
               }
             worst = std::max(worst, tensor_diff(r1, cb.bach_t().truncated(r1.degree()),
                                                 std::max(1.0, cb.bach_t().max_abs())));
           }
           return worst;
         });

  bt.add("obstruction4-is-half-bach", "dim-4 obstruction = -(1/2) Bach", 3, 1e-14,
         [](uint64_t& st) {
           auto spec = poly_metric(4, 905, 0.08, 3);
           auto p = random_point(4, st, 0.3);
           auto cb = curvature_bundle(spec, p, 4);
           auto r = obstruction4(cb);
           TensorJet expect = cb.bach_t() * (-0.5);
           return tensor_diff(r.B, expect, 1.0);
         });

  // --- criterion 7 (and the dim-4 half of criterion 3): divergence-free
  bt.add("divergence-free-dim4", "the dim-4 obstruction is divergence-free", 7, 1e-6,
         [](uint64_t& st) {
           auto spec = poly_metric(4, 910, 0.08, 3);
           auto p = random_point(4, st, 0.3);
           auto cb = curvature_bundle(spec, p, 5);
           auto r = obstruction4(cb);
           return rel(*r.divergence_residual, r.scale);
         });

  bt.add("divergence-free-dim6", "the dim-6 obstruction is divergence-free", 7, 1e-6,
         [](uint64_t& st) {
           auto spec = poly_metric(6, 911, 0.05, 3);
           auto p = random_point(6, st, 0.25);
           auto cb = curvature_bundle(spec, p, 7);
           auto r = obstruction6_direct(cb);
           return rel(*r.divergence_residual, r.scale);
         });

  // --- criterion 4: conformal covariance
  bt.add("weyl-covariance", "lowered Weyl transforms by e^{2 omega}", 4, 1e-7,
         [](uint64_t& st) {
           double worst = 0;
           for (int n : {4, 6}) {
             auto spec = poly_metric(n, 920 + n, 0.08, 3);
             auto cf = test_omega(n);
             auto hat = rescale_metric(spec, cf);
             auto p = random_point(n, st, 0.3);
             auto cb = curvature_bundle(spec, p, 2);
             auto cbh = curvature_bundle(hat, p, 2);
             double om = eval_expr_value(cf.omega, p);
             TensorJet expect = cb.C.truncated(0) * std::exp(2 * om);
             worst = std::max(worst, tensor_diff(cbh.C.truncated(0), expect,
                                                 std::max(1.0, cb.C.max_abs_value())));
           }
           return worst;
         });

  bt.add("bach-covariance-dim4", "dim-4 Bach transforms by e^{-2 omega}", 4, 1e-6,
         [](uint64_t& st) {
           auto spec = poly_metric(4, 921, 0.08, 3);
           auto cf = test_omega(4);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(4, st, 0.3);
           auto cb = curvature_bundle(spec, p, 4);
           auto cbh = curvature_bundle(hat, p, 4);
           double om = eval_expr_value(cf.omega, p);
           TensorJet expect = cb.bach_t().truncated(0) * std::exp(-2 * om);
           return tensor_diff(cbh.bach_t().truncated(0), expect,
                              std::max(1.0, cb.bach_t().max_abs_value()));
         });

  bt.add("obstruction-covariance-dim4", "dim-4 obstruction transforms by e^{-2 omega}",
         4, 1e-6, [](uint64_t& st) {
           auto spec = poly_metric(4, 922, 0.08, 3);
           auto cf = test_omega(4);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(4, st, 0.3);
           auto r = obstruction4(curvature_bundle(spec, p, 4));
           auto rh = obstruction4(curvature_bundle(hat, p, 4));
           double om = eval_expr_value(cf.omega, p);
           TensorJet expect = r.B.truncated(0) * std::exp(-2 * om);
           return tensor_diff(rh.B.truncated(0), expect, std::max(r.scale, rh.scale));
         });

  bt.add("obstruction-covariance-dim6", "dim-6 obstruction transforms by e^{-4 omega}",
         4, 1e-6, [](uint64_t& st) {
           auto spec = poly_metric(6, 923, 0.05, 3);
           auto cf = test_omega(6);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(6, st, 0.25);
           auto r = obstruction6_direct(curvature_bundle(spec, p, 6));
           auto rh = obstruction6_direct(curvature_bundle(hat, p, 6));
           double om = eval_expr_value(cf.omega, p);
           TensorJet expect = r.B * std::exp(-4 * om);
           return tensor_diff(rh.B, expect, std::max(r.scale, rh.scale));
         });

  // --- criterion 5: Einstein vanishing
  bt.add("einstein-weyl-nonzero",
         "the Einstein product S2 x S4(sqrt 3) is not conformally flat", 5, 0.0,
         [](uint64_t& st) {
           auto spec = builtin_metric("einstein_product", {{"p", "2"}, {"q", "4"}});
           auto p = random_point(6, st, 0.15);
           auto cb = curvature_bundle(spec, p, 2);
           double scale = std::max(1.0, cb.riem_low.max_abs_value());
           // pass when |C| > 0.1 scale: report 0 on success, the gap otherwise
           double norm = cb.C.max_abs_value();
           return norm > 0.1 * scale ? 0.0 : (0.1 * scale - norm);
         });

  bt.add("einstein-obstruction6-vanishes",
         "the dim-6 obstruction vanishes on the Einstein product", 5, 1e-7,
         [](uint64_t& st) {
           auto spec = builtin_metric("einstein_product", {{"p", "2"}, {"q", "4"}});
           auto p = random_point(6, st, 0.15);
           auto r = obstruction6_direct(curvature_bundle(spec, p, 6));
           return rel(r.B.max_abs(), r.scale);
         });

  bt.add("einstein-parallel-tractor",
         "parallel tractor of the Einstein scale annihilates the W-tractor", 5, 1e-7,
         [](uint64_t& st) {
           auto spec = builtin_metric("einstein_product", {{"p", "2"}, {"q", "4"}});
           auto p = random_point(6, st, 0.15);
           auto cb = curvature_bundle(spec, p, 6);
           Scale sc{&cb};
           // I = sigma Y - (1/n) J sigma X with sigma = 1
           TractorJet id(6, 1, 0, cb.J.degree());
           TensorJet one(6, cb.J.degree(), {}, 1);
           one.comp(size_t(0))[0] = 1.0;
           id.accumulate("Y", one);
           TensorJet jx(6, cb.J.degree(), {}, -1);
           std::copy(cb.J.coeffs().begin(), cb.J.coeffs().end(),
                     jx.comp(size_t(0)).begin());
           id.accumulate("X", jx, -1.0 / 6.0);
           double worst = rel(tractor_connection(id, sc).max_abs(), 1.0);
           TractorJet w = w_tractor(sc);
           TractorJet wi = tractor_contract(w, 3, id, 0, cb.g_inv);
           worst = std::max(worst, rel(wi.max_abs(), std::max(1.0, w.max_abs())));
           return worst;
         });

  // --- criterion 6: conformally flat vanishing
  bt.add("conformally-flat-dim4", "dim-4 obstruction vanishes for e^{2 omega} delta", 6,
         1e-7, [](uint64_t& st) {
           auto spec = builtin_metric(
               "conformally_flat",
               {{"n", "4"}, {"omega", print_expr(test_omega(4).omega)}});
           auto p = random_point(4, st, 0.3);
           auto r = obstruction4(curvature_bundle(spec, p, 4));
           return rel(r.B.max_abs(), r.scale);
         });

  bt.add("conformally-flat-dim6", "dim-6 obstruction vanishes for e^{2 omega} delta", 6,
         1e-6, [](uint64_t& st) {
           auto spec = builtin_metric(
               "conformally_flat",
               {{"n", "6"}, {"omega", print_expr(test_omega(6).omega)}});
           auto p = random_point(6, st, 0.25);
           auto r = obstruction6_direct(curvature_bundle(spec, p, 6));
           double worst = rel(r.B.max_abs(), r.scale);
           auto rt = obstruction6_tractor(curvature_bundle(spec, p, 6));
           worst = std::max(worst, rel(rt.B.max_abs(), rt.scale));
           return worst;
         });

  // --- criterion 9: deformation complex
  bt.add("weyl-bianchi-trivial-dim4",
         "the Weyl-Bianchi operator vanishes identically in dimension 4", 9, 1e-9,
         [](uint64_t& st) {
           auto spec = poly_metric(4, 930, 0.08, 3);
           auto p = random_point(4, st, 0.3);
           auto cb = curvature_bundle(spec, p, 3);
           double worst = 0;
           for (int k = 0; k < 3; ++k) {
             TensorJet u = random_weyl_tensor(cb, 1000 + k, 2);
             TensorJet bi = weyl_bianchi(u, cb);
             worst = std::max(worst, rel(bi.max_abs(), std::max(1.0, u.max_abs())));
           }
           return worst;
         });

  bt.add("cstar-weyl-is-bach-dim4", "C* applied to the Weyl curvature gives Bach", 9,
         1e-7, [](uint64_t& st) {
           auto spec = poly_metric(4, 931, 0.08, 3);
           auto p = random_point(4, st, 0.3);
           auto cb = curvature_bundle(spec, p, 4);
           TensorJet s = cstar(cb.C, cb);
           return tensor_diff(s, cb.bach_t().truncated(s.degree()),
                              std::max(1.0, cb.bach_t().max_abs()));
         });

  bt.add("cotton-from-weyl-divergence",
         "(n-3) Cotton = div Weyl in dimensions 4 through 8", 9, 1e-7,
         [](uint64_t& st) {
           double worst = 0;
           for (int n = 4; n <= 8; ++n) {
             auto spec = poly_metric(n, 940 + n, 0.08, 2);
             auto p = random_point(n, st, 0.25);
             auto cb = curvature_bundle(spec, p, 3);
             TensorJet divc = divergence_slot(cb.C, 0, cb.gamma, cb.g_inv);
             TensorJet lhs = cb.cotton_t() * double(n - 3);
             worst = std::max(worst, tensor_diff(lhs.truncated(divc.degree()), divc,
                                                 std::max(1.0, divc.max_abs())));
           }
           return worst;
         });

  bt.add("conformal-killing", "K output is trace-free and conformally invariant", 0,
         1e-7, [](uint64_t& st) {
           const int n = 4;
           auto spec = poly_metric(n, 950, 0.08, 3);
           auto cf = test_omega(n);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(n, st, 0.3);
           auto cb = curvature_bundle(spec, p, 2);
           auto cbh = curvature_bundle(hat, p, 2);
           TensorJet v(n, 2, {Var::Lo}, 2);
           for (auto& x : v.raw()) x = splitmix_unit(st);
           TensorJet kv = conformal_killing(v, cb);
           double worst =
               rel(trace_residual(kv, 0, 1, cb.g_inv.truncated(kv.degree())),
                   std::max(1.0, kv.max_abs()));
           // same section of the weight-2 bundle, trivialized in the new scale
           std::vector<Jet> coords;
           for (int i = 0; i < n; ++i)
             coords.push_back(Jet::coordinate(n, 2, i, p[i]));
           Jet e2o = apply_analytic(AnalyticFn::Exp,
                                    eval_expr(cf.omega, coords) * 2.0);
           TensorJet vh = mul_scalar(v, e2o);
           TensorJet kvh = conformal_killing(vh, cbh);
           TensorJet expect = mul_scalar(kv, e2o.truncated(kv.degree()));
           worst = std::max(worst, tensor_diff(kvh, expect.truncated(kvh.degree()),
                                               std::max(1.0, kv.max_abs())));
           return worst;
         });

  // --- criterion 8: tractor identity suite
  bt.add("tractor-slot-algebra", "projector contractions and grad X = Z, exactly", 8,
         1e-14, [](uint64_t& st) {
           const int n = 4;
           auto spec = poly_metric(n, 960, 0.08, 2);
           auto p = random_point(n, st, 0.3);
           auto cb = curvature_bundle(spec, p, 2);
           Scale sc{&cb};
           // h(V,V) = g^{ab} mu_a mu_b + 2 sigma rho on a standard tractor
           TractorJet v(n, 1, 0, 2);
           TensorJet sig(n, 2, {}, 1), rho(n, 2, {}, -1), mu(n, 2, {Var::Lo}, 1);
           for (auto& x : sig.raw()) x = splitmix_unit(st);
           for (auto& x : rho.raw()) x = splitmix_unit(st);
           for (auto& x : mu.raw()) x = splitmix_unit(st);
           v.accumulate("Y", sig);
           v.accumulate("Z", mu);
           v.accumulate("X", rho);
           TensorJet h2 = tractor_pairing(v, v, cb.g_inv);
           TensorJet mur = raise_slot(mu, 0, cb.g_inv);
           // assemble g^{ab} mu_a mu_b + 2 sigma rho directly
           TensorJet want(n, 2, {}, 0);
           {
             auto dst = want.comp(size_t(0));
             for (int a = 0; a < n; ++a)
               jet_mul_acc(want.space(), 2, dst, mur.comp(size_t(a)),
                           mu.comp(size_t(a)));
             Jet tmp(want.space_ptr());
             jet_mul_acc(want.space(), 2, tmp.coeffs(), sig.comp(size_t(0)),
                         rho.comp(size_t(0)));
             for (size_t k = 0; k < dst.size(); ++k) dst[k] += 2 * tmp.coeffs()[k];
           }
           double worst = tensor_diff(h2, want, 1.0);
           // grad of the X-unit tractor is exactly the Z image
           TractorJet xunit(n, 1, 0, 2);
           TensorJet one(n, 2, {}, -1);
           one.comp(size_t(0))[0] = 1.0;
           xunit.accumulate("X", one);
           TractorJet dx = tractor_connection(xunit, sc);
           TensorJet zpart = dx.word_component("Z");
           worst = std::max(worst, tensor_diff(zpart, cb.g.truncated(1), 1.0));
           for (auto& [w, t] : dx.slots)
             if (w != "Z") worst = std::max(worst, t.max_abs());
           return worst;
         });

  bt.add("tractor-dx-identity", "D_A X^A V = (n+2w+2)(n+w) V", 8, 1e-8,
         [](uint64_t& st) {
           double worst = 0;
           for (int n : {4, 6, 8}) {
             auto spec = poly_metric(n, 970 + n, 0.08, 2);
             auto p = random_point(n, st, 0.25);
             auto cb = curvature_bundle(spec, p, 4);
             Scale sc{&cb};
             for (int w = -3; w <= 3; ++w) {
               TractorJet v = random_tractor(n, 1, w, 4, st);
               TractorJet xv = prepend_x(v);
               TractorJet dxv = tractor_D(xv, sc);
               TractorJet lhs = tractor_trace(dxv, 0, 1, cb.g_inv);
               TractorJet rhs = v.truncated(lhs.degree());
               rhs *= double((n + 2 * w + 2) * (n + w));
               TractorJet d = lhs - rhs;
               worst = std::max(worst, rel(d.max_abs(), std::max(1.0, rhs.max_abs())));
             }
           }
           return worst;
         });

  bt.add("tractor-metricity", "the connection is metric: d h(U,V) = h(dU,V) + h(U,dV)",
         8, 1e-9, [](uint64_t& st) {
           const int n = 6;
           auto spec = poly_metric(n, 972, 0.06, 2);
           auto p = random_point(n, st, 0.25);
           auto cb = curvature_bundle(spec, p, 3);
           Scale sc{&cb};
           TractorJet u = random_tractor(n, 1, 0, 3, st);
           TractorJet v = random_tractor(n, 1, 0, 3, st);
           TensorJet huv = tractor_pairing(u, v, cb.g_inv);
           TensorJet lhs = covariant_derivative(huv, cb.gamma);
           TractorJet du = tractor_connection(u, sc);
           TractorJet dv = tractor_connection(v, sc);
           // pairings with one derivative slot riding along
           auto pair_extra = [&](const TractorJet& a, const TractorJet& b) {
             std::array<const TractorJet*, 2> ops{&a, &b};
             std::vector<std::pair<TrSlotRef, TrSlotRef>> prs{{{0, 0}, {1, 0}}};
             TractorJet s = tractor_network(ops, prs, {}, cb.g_inv);
             return s.word_component("");
           };
           TensorJet rhs = pair_extra(du, v.truncated(du.degree()));
           rhs += pair_extra(dv, u.truncated(dv.degree()));
           return tensor_diff(lhs, rhs, std::max(1.0, huv.max_abs()));
         });

  bt.add("box-yamabe-covariance",
         "Box at weight 1 - n/2 is conformally covariant on scalars", 0, 1e-7,
         [](uint64_t& st) {
           const int n = 4;
           const int w = 1 - n / 2;
           auto spec = poly_metric(n, 974, 0.08, 2);
           auto cf = test_omega(n);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(n, st, 0.3);
           auto cb = curvature_bundle(spec, p, 3);
           auto cbh = curvature_bundle(hat, p, 3);
           Scale sc{&cb}, sch{&cbh};
           TractorJet f(n, 0, w, 3);
           TensorJet fc(n, 3, {}, w);
           for (auto& x : fc.raw()) x = splitmix_unit(st);
           f.accumulate("", fc);
           std::vector<Jet> coords;
           for (int i = 0; i < n; ++i) coords.push_back(Jet::coordinate(n, 3, i, p[i]));
           Jet om = eval_expr(cf.omega, coords);
           Jet ew = apply_analytic(AnalyticFn::Exp, om * double(w));
           TractorJet fh(n, 0, w, 3);
           fh.accumulate("", mul_scalar(fc, ew));
           TractorJet bf = tractor_box(f, sc);
           TractorJet bfh = tractor_box(fh, sch);
           Jet ew2 = apply_analytic(AnalyticFn::Exp, om * double(w - 2));
           TensorJet expect = mul_scalar(bf.word_component(""), ew2.truncated(1));
           return tensor_diff(bfh.word_component(""), expect,
                              std::max(1.0, bf.max_abs()));
         });

  bt.add("di-splitting-recovers-w", "the splitting of the Weyl curvature is (n-3) W", 8,
         1e-7, [](uint64_t& st) {
           const int n = 6;
           auto spec = poly_metric(n, 976, 0.05, 3);
           auto p = random_point(n, st, 0.25);
           auto cb = curvature_bundle(spec, p, 6);
           Scale sc{&cb};
           TractorJet w = w_tractor(sc);
           TractorJet di = di_splitting(cb.C, sc);
           TractorJet expect = w.truncated(di.degree()) * double(n - 3);
           TractorJet d = di - expect;
           return rel(d.max_abs(), std::max(1.0, expect.max_abs()));
         });

  bt.add("di-splitting-projects-back",
         "the top slot of the splitting returns (n-4)(n-3) times the input", 8, 1e-8,
         [](uint64_t& st) {
           const int n = 6;
           auto spec = poly_metric(n, 977, 0.06, 2);
           auto p = random_point(n, st, 0.25);
           auto cb = curvature_bundle(spec, p, 4);
           Scale sc{&cb};
           TensorJet u = random_weyl_tensor(cb, 555, 4);
           TractorJet di = di_splitting(u, sc);
           TensorJet top = di.word_component("ZZZZ");
           TensorJet expect = u.truncated(top.degree()) * double((n - 4) * (n - 3));
           return tensor_diff(top, expect, std::max(1.0, expect.max_abs()));
         });

  bt.add("w-tractor-symmetries", "W is trace-free with Weyl-type symmetries", 8, 1e-8,
         [](uint64_t& st) {
           double worst = 0;
           for (int n : {6, 8}) {
             auto spec = poly_metric(n, 978 + n, 0.06, 2, n == 8 ? 3 : 0,
                                     n == 8 ? 6 : 0);
             auto p = random_point(n, st, 0.2);
             auto cb = curvature_bundle(spec, p, 4);
             Scale sc{&cb};
             TractorJet w = w_tractor(sc);
             double scale = std::max(1.0, w.max_abs());
             std::array<int, 4> sw01{1, 0, 2, 3}, swpair{2, 3, 0, 1};
             TractorJet t1 = tractor_permute(w, sw01) + w;
             worst = std::max(worst, rel(t1.max_abs(), scale));
             TractorJet t2 = tractor_permute(w, swpair) - w;
             worst = std::max(worst, rel(t2.max_abs(), scale));
             for (int i = 0; i < 4; ++i)
               for (int j = i + 1; j < 4; ++j)
                 worst = std::max(
                     worst, rel(tractor_trace(w, i, j, cb.g_inv).max_abs(), scale));
           }
           return worst;
         });

  bt.add("bottom-slot-dim6",
         "the power Laplacian of W lands in the bottom slot (dim 6)", 8, 1e-6,
         [](uint64_t& st) {
           auto spec = poly_metric(6, 980, 0.05, 3);
           auto p = random_point(6, st, 0.25);
           auto r = obstruction6_tractor(curvature_bundle(spec, p, 6));
           return rel(*r.upper_slot_residual, r.scale);
         });

  // --- criterion 11: hash convention lock-in
  bt.add("hash-dim6-display",
         "(1/4) W##W reproduces the three-term curvature square on W", 11, 1e-8,
         [](uint64_t& st) {
           auto spec = poly_metric(6, 982, 0.05, 3);
           auto p = random_point(6, st, 0.25);
           auto cb = curvature_bundle(spec, p, 6);
           Scale sc{&cb};
           TractorJet w = w_tractor(sc);
           TractorJet hh = hash_double(w, w, cb.g_inv);
           hh *= 0.25;
           std::array<const TractorJet*, 2> ops{&w, &w};
           auto term = [&](std::vector<std::pair<TrSlotRef, TrSlotRef>> prs,
                           std::vector<TrSlotRef> outs) {
             return tractor_network(ops, prs, outs, cb.g_inv, hh.degree());
           };
           TractorJet d3 =
               term({{{0, 0}, {1, 1}}, {{0, 3}, {1, 0}}},
                    {{0, 2}, {0, 1}, {1, 2}, {1, 3}}) * -1.0;
           d3 += term({{{0, 0}, {1, 1}}, {{0, 3}, {1, 2}}},
                      {{1, 0}, {0, 1}, {0, 2}, {1, 3}}) * -1.0;
           d3 += term({{{0, 0}, {1, 1}}, {{0, 3}, {1, 3}}},
                      {{1, 0}, {0, 1}, {1, 2}, {0, 2}}) * -1.0;
           TractorJet diff = hh - d3;
           return rel(diff.max_abs(), std::max(1.0, d3.max_abs()));
         });

  bt.add("hash-associativity", "(W##W)##W = W##(W##W) on W", 11, 1e-8,
         [](uint64_t& st) {
           auto spec = poly_metric(6, 983, 0.05, 3);
           auto p = random_point(6, st, 0.25);
           auto cb = curvature_bundle(spec, p, 6);
           Scale sc{&cb};
           TractorJet w = w_tractor(sc);
           TractorJet ww = hash_double(w, w, cb.g_inv);
           TractorJet lhs = hash_double(ww, w, cb.g_inv);
           TractorJet rhs = hash_double(w, ww, cb.g_inv);
           TractorJet d = lhs - rhs;
           return rel(d.max_abs(), std::max(1.0, lhs.max_abs()));
         });

  bt.add("hash-annihilates-metric", "the double hash of W kills the tractor metric", 0,
         1e-10, [](uint64_t& st) {
           auto spec = poly_metric(6, 984, 0.05, 2);
           auto p = random_point(6, st, 0.25);
           auto cb = curvature_bundle(spec, p, 4);
           Scale sc{&cb};
           TractorJet w = w_tractor(sc);
           TractorJet h = tractor_metric(sc, w.degree());
           TractorJet wh = hash_double(w, h, cb.g_inv);
           return rel(wh.max_abs(), std::max(1.0, w.max_abs()));
         });

  // --- rescaling / two-scale checks
  bt.add("rescale-standard-tractor",
         "slot transport preserves the tractor pairing across scales", 0, 1e-9,
         [](uint64_t& st) {
           const int n = 4;
           auto spec = poly_metric(n, 986, 0.08, 2);
           auto cf = test_omega(n);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(n, st, 0.3);
           auto cb = curvature_bundle(spec, p, 3);
           auto cbh = curvature_bundle(hat, p, 3);
           RescaleData rd = make_rescale_data(cf, cb, 3);
           TractorJet u = random_tractor(n, 1, 0, 3, st);
           TractorJet v = random_tractor(n, 1, 0, 3, st);
           TractorJet uh = rescale_components(u, rd);
           TractorJet vh = rescale_components(v, rd);
           TensorJet lhs = tractor_pairing(uh, vh, cbh.g_inv);
           TensorJet rhs = tractor_pairing(u, v, cb.g_inv).truncated(lhs.degree());
           return tensor_diff(lhs, rhs, std::max(1.0, rhs.max_abs()));
         });

  bt.add("w-tractor-two-scale",
         "transported W components equal the W computed in the new scale", 0, 1e-6,
         [](uint64_t& st) {
           const int n = 6;
           auto spec = poly_metric(n, 987, 0.05, 2);
           auto cf = test_omega(n);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(n, st, 0.25);
           auto cb = curvature_bundle(spec, p, 6);
           auto cbh = curvature_bundle(hat, p, 6);
           Scale sc{&cb}, sch{&cbh};
           TractorJet w = w_tractor(sc);
           TractorJet wh_direct = w_tractor(sch);
           RescaleData rd = make_rescale_data(cf, cb, w.degree());
           TractorJet wh = rescale_components(w, rd);
           TractorJet d = wh - wh_direct.truncated(wh.degree());
           return rel(d.max_abs(), std::max(1.0, w.max_abs()));
         });

  // --- criterion 1: the dim-6 cross-route oracle pair
  bt.add("cross-route-dim6",
         "direct and tractor dim-6 obstruction agree on seeded random metrics", 1, 1e-6,
         [](uint64_t& st, std::string& note) {
           double worst = 0;
           for (int k = 0; k < 5; ++k) {
             auto spec = poly_metric(6, 100 + k, 0.05, 3);
             for (int q = 0; q < 2; ++q) {
               auto p = random_point(6, st, 0.25);
               auto cb = curvature_bundle(spec, p, 6);
               auto r1 = obstruction6_direct(cb);
               auto r2 = obstruction6_tractor(cb);
               double d = tensor_diff(r1.B, r2.B, std::max(r1.scale, r2.scale));
               if (d > 1e-6) note = "measured route ratio " +
                                    std::to_string(route_ratio(r1.B, r2.B));
               worst = std::max(worst, d);
             }
           }
           return worst;
         });

  bt.add("leading-term-dim6",
         "for a tiny perturbation the obstruction is the Laplacian of div div Weyl",
         0, 0.05, [](uint64_t& st) {
           // degree-6 entries so the six-derivative leading term is alive
           auto spec = poly_metric(6, 988, 1e-3, 6, 40);
           auto p = random_point(6, st, 0.2);
           auto cb = curvature_bundle(spec, p, 6);
           auto r = obstruction6_direct(cb);
           TensorJet lead = dim6_leading_term(cb);
           TensorJet d = r.B.truncated(0) - lead;
           double norm = r.B.max_abs_value();
           if (norm <= 0) return 1.0;
           return d.max_abs_value() / norm;
         });
}

void add_dim8_checks(Battery& bt) {
  bt.add("cross-route-dim8",
         "direct and tractor dim-8 obstruction agree on sparse random metrics", 2, 1e-4,
         [](uint64_t& st, std::string& note) {
           double worst = 0;
           for (int k = 0; k < 2; ++k) {
             auto spec = poly_metric(8, 200 + k, 0.02, 2, 2, 5);
             auto p = random_point(8, st, 0.2);
             auto cb = curvature_bundle(spec, p, 8);
             auto r1 = obstruction8_direct(cb);
             auto r2 = obstruction8_tractor(cb);
             double d = tensor_diff(r1.B, r2.B, std::max(r1.scale, r2.scale));
             if (d > 1e-4) note = "measured route ratio " +
                                  std::to_string(route_ratio(r1.B, r2.B));
             worst = std::max(worst, d);
             worst = std::max(worst, rel(r1.trace_residual, r1.scale));
             worst = std::max(worst, rel(r1.symmetry_residual, r1.scale));
             worst = std::max(worst, rel(r2.trace_residual, r2.scale));
           }
           return worst;
         });

  bt.add("obstruction-covariance-dim8", "dim-8 obstruction transforms by e^{-6 omega}",
         4, 1e-4, [](uint64_t& st) {
           auto spec = poly_metric(8, 210, 0.02, 2, 2, 4);
           auto cf = test_omega(8);
           auto hat = rescale_metric(spec, cf);
           auto p = random_point(8, st, 0.2);
           auto r = obstruction8_direct(curvature_bundle(spec, p, 8));
           auto rh = obstruction8_direct(curvature_bundle(hat, p, 8));
           double om = eval_expr_value(cf.omega, p);
           TensorJet expect = r.B * std::exp(-6 * om);
           return tensor_diff(rh.B, expect, std::max(r.scale, rh.scale));
         });

  bt.add("conformally-flat-dim8", "dim-8 obstruction vanishes for e^{2 omega} delta", 6,
         1e-4, [](uint64_t& st) {
           auto spec = builtin_metric(
               "conformally_flat",
               {{"n", "8"}, {"omega", "0.05*x0 - 0.04*x1 + 0.03*x0*x2"}});
           auto p = random_point(8, st, 0.2);
           auto r = obstruction8_direct(curvature_bundle(spec, p, 8));
           return rel(r.B.max_abs(), r.scale);
         });

  bt.add("bottom-slot-dim8",
         "the power Laplacian of W lands in the bottom slot (dim 8)", 8, 1e-4,
         [](uint64_t& st) {
           auto spec = poly_metric(8, 211, 0.02, 2, 2, 4);
           auto p = random_point(8, st, 0.2);
           auto r = obstruction8_tractor(curvature_bundle(spec, p, 8));
           return rel(*r.upper_slot_residual, r.scale);
         });
}

} // namespace

VerifyReport run_verify(const std::string& suite, uint64_t seed) {
  if (suite != "fast" && suite != "dim8" && suite != "full")
    throw usage_error("unknown suite '" + suite + "' (expected fast, dim8 or full)");
  Battery bt;
  bt.seed = seed;
  if (suite == "fast" || suite == "full") add_fast_checks(bt);
  if (suite == "dim8" || suite == "full") add_dim8_checks(bt);
  auto t0 = Clock::now();
  bt.run();
  VerifyReport rep;
  rep.suite = suite;
  rep.seed = seed;
  rep.checks = std::move(bt.results);
  rep.seconds = elapsed(t0);
  return rep;
}

} // namespace tractoria
