#include "tractoria/defcomplex.hpp"

#include <array>
#include <cmath>

#include "tractoria/metric.hpp"

namespace tractoria {

TensorJet conformal_killing(const TensorJet& v, const CurvatureBundle& cb) {
  if (v.rank() != 1 || v.vars()[0] != Var::Lo)
    throw usage_error("conformal_killing expects a covector");
  const int n = cb.dim;
  TensorJet dv = covariant_derivative(v, cb.gamma); // [a][b] = grad_a v_b
  const int deg = dv.degree();
  std::array<int, 2> both{0, 1};
  TensorJet sym = symmetrize(dv, both);
  // trace part: (1/n) g_ab g^{cd} grad_c v_d
  TensorJet raised = raise_slot(dv, 0, cb.g_inv.truncated(deg));
  TensorJet tr = contract_slots(raised, 0, 1); // scalar
  TensorJet out(n, deg, {Var::Lo, Var::Lo}, v.weight());
  TensorJet gt = cb.g.truncated(deg);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      auto dst = out.comp({a, b});
      auto s = sym.comp({a, b});
      std::copy(s.begin(), s.end(), dst.begin());
      Jet tmp(out.space_ptr());
      jet_mul_acc(out.space(), deg, tmp.coeffs(), gt.comp({a, b}), tr.comp(0));
      for (size_t k = 0; k < dst.size(); ++k) dst[k] -= tmp.coeffs()[k] / n;
    }
  out.hints = {{SymKind::Symmetric, 0, 1}, {SymKind::TraceFree, 0, 1}};
  return out;
}

TensorJet cstar(const TensorJet& u, const CurvatureBundle& cb) {
  if (u.rank() != 4) throw usage_error("cstar expects a (0,4) tensor");
  double res = weyl_symmetry_residual(u, cb.g_inv);
  double scale = std::max(1.0, u.max_abs());
  if (res > 1e-6 * scale)
    throw usage_error("cstar input lacks Weyl symmetries (residual " +
                      std::to_string(res) + ")");
  const int n = cb.dim;
  TensorJet d2 = covariant_derivative(covariant_derivative(u, cb.gamma), cb.gamma);
  // d2[f][e][abcd] = grad_f grad_e U_abcd
  const int deg = d2.degree();
  TensorJet ginv = cb.g_inv.truncated(deg);
  TensorJet d2r = raise_slot(raise_slot(d2, 0, ginv), 1, ginv); // grad^f grad^e
  TensorJet pr = raise_slot(raise_slot(cb.P.truncated(deg), 0, ginv), 1, ginv);
  TensorJet ut = u.truncated(deg);
  TensorJet out(n, deg, {Var::Lo, Var::Lo}, u.weight() - 4);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      auto dst = out.comp({b, d});
      for (int a = 0; a < n; ++a)
        for (int c = 0; c < n; ++c) {
          auto s1 = d2r.comp({a, c, a, b, c, d});
          auto s2 = d2r.comp({c, a, a, b, c, d});
          for (size_t k = 0; k < dst.size(); ++k) dst[k] += 0.5 * (s1[k] + s2[k]);
          jet_mul_acc(out.space(), deg, dst, pr.comp({a, c}), ut.comp({a, b, c, d}));
        }
    }
  out.hints = {{SymKind::Symmetric, 0, 1}};
  return out;
}

TensorJet weyl_bianchi(const TensorJet& u, const CurvatureBundle& cb) {
  if (u.rank() != 4) throw usage_error("weyl_bianchi expects a (0,4) tensor");
  const int n = cb.dim;
  if (n < 4) throw usage_error("weyl_bianchi needs n >= 4");
  TensorJet du = covariant_derivative(u, cb.gamma); // [x][abcd]
  const int deg = du.degree();
  TensorJet ginv = cb.g_inv.truncated(deg);
  TensorJet gt = cb.g.truncated(deg);

  // div_s u_{bc}{}^s{}_e = g^{sx} grad_x? No: contraction is on u's third
  // slot: v_{bce} = grad^s u_{bcse}
  TensorJet raised = raise_slot(du, 0, ginv);
  TensorJet div3 = contract_slots(raised, 0, 3); // [b][c][e]

  TensorJet pre(n, deg, {Var::Lo, Var::Lo, Var::Lo, Var::Lo, Var::Lo}, u.weight());
  // pre_{abcde} = (n-3) grad_a u_{bcde} - g_{da} v_{bce} + g_{ea} v_{bcd}
  TensorJet dut = du.truncated(deg);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          for (int e = 0; e < n; ++e) {
            auto dst = pre.comp({a, b, c, d, e});
            auto t = dut.comp({a, b, c, d, e});
            for (size_t k = 0; k < dst.size(); ++k) dst[k] = (n - 3) * t[k];
            Jet tmp(pre.space_ptr());
            jet_mul_acc(pre.space(), deg, tmp.coeffs(), gt.comp({d, a}),
                        div3.comp({b, c, e}));
            for (size_t k = 0; k < dst.size(); ++k) dst[k] -= tmp.coeffs()[k];
            Jet tmp2(pre.space_ptr());
            jet_mul_acc(pre.space(), deg, tmp2.coeffs(), gt.comp({e, a}),
                        div3.comp({b, c, d}));
            for (size_t k = 0; k < dst.size(); ++k) dst[k] += tmp2.coeffs()[k];
          }
  std::array<int, 3> abc{0, 1, 2};
  TensorJet out = antisymmetrize(pre, abc);
  out.set_weight(u.weight());
  out.hints = {{SymKind::Skew, 0, 1}, {SymKind::Skew, 3, 4}};
  return out;
}

TensorJet project_weyl_symmetric(const TensorJet& t, const TensorJet& g,
                                 const TensorJet& g_inv) {
  const int n = t.dim();
  const int deg = t.degree();
  // Riemann-type part: double skew, pair symmetric, then remove the fully
  // antisymmetric component to enforce the first Bianchi identity.
  std::array<int, 2> p01{0, 1}, p23{2, 3};
  TensorJet s = antisymmetrize(antisymmetrize(t, p01), p23);
  std::array<int, 4> swap_pairs{2, 3, 0, 1};
  TensorJet sw = permute_slots(s, swap_pairs);
  s += sw;
  s *= 0.5;
  std::array<int, 4> all{0, 1, 2, 3};
  TensorJet alt = antisymmetrize(s, all);
  s -= alt;

  // subtract the Ricci-type traces: for V with Riemann symmetries,
  // E_{bd} = g^{ac} V_{abcd}, sc = g^{bd} E_{bd},
  // V_weyl = V - (g_{ac} F_{bd} - g_{bc} F_{ad} - g_{ad} F_{bc} + g_{bd} F_{ac})
  // with F = (E - sc g / (2(n-1))) / (n-2)   [Kulkarni-Nomizu of g and F]
  TensorJet raised = raise_slot(s, 0, g_inv.truncated(deg));
  TensorJet e = contract_slots(raised, 0, 2); // E_{bd}
  TensorJet eraised = raise_slot(e, 0, g_inv.truncated(deg));
  TensorJet sc = contract_slots(eraised, 0, 1);
  TensorJet f(n, deg, {Var::Lo, Var::Lo}, t.weight());
  TensorJet gt = g.truncated(deg);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      auto dst = f.comp({a, b});
      auto ee = e.comp({a, b});
      Jet tmp(f.space_ptr());
      jet_mul_acc(f.space(), deg, tmp.coeffs(), gt.comp({a, b}), sc.comp(0));
      for (size_t k = 0; k < dst.size(); ++k)
        dst[k] = (ee[k] - tmp.coeffs()[k] / (2.0 * (n - 1))) / (n - 2);
    }
  TensorJet out = s;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          auto dst = out.comp({a, b, c, d});
          auto term = [&](int gi, int gj, int fi, int fj, double sgn) {
            Jet tmp(out.space_ptr());
            jet_mul_acc(out.space(), deg, tmp.coeffs(), gt.comp({gi, gj}),
                        f.comp({fi, fj}));
            for (size_t k = 0; k < dst.size(); ++k) dst[k] += sgn * tmp.coeffs()[k];
          };
          // Kulkarni-Nomizu product g . F with Riemann index placement
          term(a, c, b, d, -1.0);
          term(b, c, a, d, +1.0);
          term(a, d, b, c, +1.0);
          term(b, d, a, c, -1.0);
        }
  out.set_weight(2);
  out.hints = {{SymKind::Skew, 0, 1}, {SymKind::Skew, 2, 3}, {SymKind::TraceFree, 0, 2}};
  return out;
}

double weyl_symmetry_residual(const TensorJet& u, const TensorJet& g_inv) {
  double r = 0.0;
  r = std::max(r, skew_residual(u, 0, 1));
  r = std::max(r, skew_residual(u, 2, 3));
  std::array<int, 4> swap_pairs{2, 3, 0, 1};
  TensorJet sw = permute_slots(u, swap_pairs);
  sw -= u;
  r = std::max(r, sw.max_abs());
  std::array<int, 3> first3{0, 1, 2};
  r = std::max(r, antisymmetrize(u, first3).max_abs()); // first Bianchi
  r = std::max(r, trace_residual(u, 0, 2, g_inv));
  r = std::max(r, trace_residual(u, 0, 3, g_inv));
  r = std::max(r, trace_residual(u, 1, 2, g_inv));
  return r;
}

TensorJet random_weyl_tensor(const CurvatureBundle& cb, uint64_t seed, int degree) {
  const int n = cb.dim;
  TensorJet t(n, degree, {Var::Lo, Var::Lo, Var::Lo, Var::Lo}, 2);
  uint64_t st = seed;
  for (size_t c = 0; c < t.ncomp(); ++c) {
    auto dst = t.comp(c);
    for (size_t k = 0; k < dst.size(); ++k) dst[k] = splitmix_unit(st);
  }
  return project_weyl_symmetric(t, cb.g.truncated(degree), cb.g_inv.truncated(degree));
}

} // namespace tractoria
