#include "tractoria/curvature.hpp"

#include <cmath>

#include "tractoria/parallel.hpp"

namespace tractoria {

namespace {

// componentwise coordinate partials, new leading slot
TensorJet coordinate_partials(const TensorJet& t, int target_degree) {
  if (t.degree() < 1) throw degree_error("jet degree exhausted taking a derivative");
  int deg = (target_degree < 0) ? t.degree() - 1 : target_degree;
  std::vector<Var> vars{Var::Lo};
  vars.insert(vars.end(), t.vars().begin(), t.vars().end());
  TensorJet r(t.dim(), deg, vars, t.weight());
  const int d = t.dim();
  const auto& sp = t.space();
  auto nsrc = size_t(r.jetlen());
  parallel_for(t.ncomp(), [&](size_t lo, size_t hi) {
    for (size_t c = lo; c < hi; ++c) {
      for (int a = 0; a < d; ++a) {
        auto src = sp.partial_src(a);
        auto fac = sp.partial_fac(a);
        auto in = t.comp(c);
        auto out = r.comp(size_t(a) * t.ncomp() + c);
        for (size_t k = 0; k < nsrc; ++k) out[k] = fac[k] * in[src[k]];
      }
    }
  });
  return r;
}

} // namespace

TensorJet christoffel(const TensorJet& g, const TensorJet& g_inv) {
  if (g.degree() < 1) throw degree_error("christoffel needs metric degree >= 1");
  const int n = g.dim();
  const int deg = g.degree() - 1;
  TensorJet dg = coordinate_partials(g, deg); // dg[x][a][b] = del_x g_ab
  TensorJet gamma(n, deg, {Var::Up, Var::Lo, Var::Lo}, 0);
  TensorJet ginv_t = g_inv.truncated(deg);
  parallel_for(size_t(n) * n * n, [&](size_t lo, size_t hi) {
    for (size_t f = lo; f < hi; ++f) {
      int c = int(f % n);
      int b = int((f / n) % n);
      int a = int(f / (size_t(n) * n));
      if (b > c) continue; // symmetric in bc, fill later
      Jet s(gamma.space_ptr());
      for (int d = 0; d < n; ++d) {
        // del_b g_dc + del_c g_db - del_d g_bc
        Jet inner(gamma.space_ptr());
        auto acc = inner.coeffs();
        auto add = [&](std::span<const double> x, double sgn) {
          for (size_t k = 0; k < acc.size(); ++k) acc[k] += sgn * x[k];
        };
        add(dg.comp({b, d, c}), 1.0);
        add(dg.comp({c, d, b}), 1.0);
        add(dg.comp({d, b, c}), -1.0);
        jet_mul_acc(gamma.space(), deg, s.coeffs(), ginv_t.comp({a, d}), inner.coeffs());
      }
      s *= 0.5;
      auto dst = gamma.comp({a, b, c});
      std::copy(s.coeffs().begin(), s.coeffs().end(), dst.begin());
    }
  });
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < b; ++c) {
        auto src = gamma.comp({a, c, b});
        auto dst = gamma.comp({a, b, c});
        std::copy(src.begin(), src.end(), dst.begin());
      }
  return gamma;
}

TensorJet covariant_derivative(const TensorJet& t, const TensorJet& gamma,
                               int target_degree) {
  if (t.degree() < 1) throw degree_error("jet degree exhausted in covariant derivative");
  const int n = t.dim();
  int deg = (target_degree < 0) ? t.degree() - 1 : target_degree;
  if (deg > t.degree() - 1) deg = t.degree() - 1;
  // the connection coefficients bound the trustworthy output order
  if (t.rank() > 0 && deg > gamma.degree()) deg = gamma.degree();
  TensorJet out = coordinate_partials(t, deg);
  const int rank = t.rank();
  const bool scalar = (deg == 0); // tiny jets: skip the kernel call overhead

  parallel_for(out.ncomp(), [&](size_t lo, size_t hi) {
    std::vector<int> idx(rank + 1), tidx(rank);
    Jet tmpj(out.space_ptr());
    for (size_t f = lo; f < hi; ++f) {
      size_t tmp = f;
      for (int k = rank; k >= 0; --k) {
        idx[k] = int(tmp % n);
        tmp /= n;
      }
      int a = idx[0];
      auto dst = out.comp(f);
      for (int s = 0; s < rank; ++s) {
        for (int k = 0; k < rank; ++k) tidx[k] = idx[k + 1];
        int is = tidx[s];
        double sign = (t.vars()[s] == Var::Lo) ? -1.0 : 1.0;
        for (int e = 0; e < n; ++e) {
          tidx[s] = e;
          auto gam = (sign < 0) ? gamma.comp({e, a, is}) : gamma.comp({is, a, e});
          auto src = t.comp(t.flat_index(tidx));
          if (scalar) {
            dst[0] += sign * gam[0] * src[0];
          } else if (sign < 0) {
            std::fill(tmpj.coeffs().begin(), tmpj.coeffs().end(), 0.0);
            jet_mul_acc(out.space(), deg, tmpj.coeffs(), gam, src);
            for (size_t k = 0; k < dst.size(); ++k) dst[k] -= tmpj.coeffs()[k];
          } else {
            jet_mul_acc(out.space(), deg, dst, gam, src);
          }
        }
      }
    }
  });
  return out;
}

TensorJet riemann(const TensorJet& gamma) {
  if (gamma.degree() < 1) throw degree_error("riemann needs christoffel degree >= 1");
  const int n = gamma.dim();
  const int deg = gamma.degree() - 1;
  TensorJet dgam = coordinate_partials(gamma, deg); // [x][c][a][b] = del_x Gamma^c_ab
  TensorJet r(n, deg, {Var::Lo, Var::Lo, Var::Up, Var::Lo}, 0);

  std::vector<std::pair<int, int>> ab;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) ab.push_back({a, b});

  parallel_for(ab.size(), [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k) {
      auto [a, b] = ab[k];
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          Jet s(r.space_ptr());
          auto acc = s.coeffs();
          auto da = dgam.comp({a, c, b, d});
          auto db = dgam.comp({b, c, a, d});
          for (size_t q = 0; q < acc.size(); ++q) acc[q] = da[q] - db[q];
          for (int e = 0; e < n; ++e) {
            jet_mul_acc(r.space(), deg, acc, gamma.comp({c, a, e}), gamma.comp({e, b, d}));
            Jet t2(r.space_ptr());
            jet_mul_acc(r.space(), deg, t2.coeffs(), gamma.comp({c, b, e}),
                        gamma.comp({e, a, d}));
            for (size_t q = 0; q < acc.size(); ++q) acc[q] -= t2.coeffs()[q];
          }
          auto dst = r.comp({a, b, c, d});
          std::copy(acc.begin(), acc.end(), dst.begin());
          auto neg = r.comp({b, a, c, d});
          for (size_t q = 0; q < acc.size(); ++q) neg[q] = -acc[q];
        }
    }
  });
  return r;
}

std::pair<TensorJet, Jet> ricci_scalar(const TensorJet& riem, const TensorJet& g_inv) {
  const int n = riem.dim();
  TensorJet ric(n, riem.degree(), {Var::Lo, Var::Lo}, 0);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      auto dst = ric.comp({b, d});
      for (int a = 0; a < n; ++a) {
        auto src = riem.comp({a, b, a, d});
        for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
  Jet sc(ric.space_ptr());
  TensorJet ginv_t = g_inv.truncated(ric.degree());
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d)
      jet_mul_acc(ric.space(), ric.degree(), sc.coeffs(), ginv_t.comp({b, d}),
                  ric.comp({b, d}));
  return {std::move(ric), std::move(sc)};
}

std::pair<TensorJet, Jet> schouten(const TensorJet& ricci, const Jet& scal,
                                   const TensorJet& g, const TensorJet& g_inv) {
  (void)g_inv;
  const int n = ricci.dim();
  if (n < 3) throw usage_error("schouten needs n >= 3");
  Jet j = scal * (1.0 / (2.0 * (n - 1)));
  TensorJet p(n, ricci.degree(), {Var::Lo, Var::Lo}, 0);
  TensorJet gt = g.truncated(ricci.degree());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      auto dst = p.comp({a, b});
      auto r = ricci.comp({a, b});
      std::copy(r.begin(), r.end(), dst.begin());
      Jet tmp(p.space_ptr());
      jet_mul_acc(p.space(), p.degree(), tmp.coeffs(), j.coeffs(), gt.comp({a, b}));
      for (size_t k = 0; k < dst.size(); ++k)
        dst[k] = (dst[k] - tmp.coeffs()[k]) / (n - 2);
    }
  p.hints = {{SymKind::Symmetric, 0, 1}};
  return {std::move(p), std::move(j)};
}

TensorJet lower_riemann(const TensorJet& riem, const TensorJet& g) {
  TensorJet low = lower_slot(riem, 2, g.truncated(riem.degree()));
  low.set_weight(2);
  return low;
}

TensorJet weyl(const TensorJet& riem_low, const TensorJet& schouten_p, const TensorJet& g) {
  const int n = riem_low.dim();
  const int deg = riem_low.degree();
  TensorJet c(n, deg, {Var::Lo, Var::Lo, Var::Lo, Var::Lo}, 2);
  if (n == 3) return c; // Weyl vanishes identically in dimension 3
  TensorJet gt = g.truncated(deg);
  TensorJet pt = schouten_p.truncated(deg);
  parallel_for(size_t(n) * n, [&](size_t lo, size_t hi) {
    for (size_t f = lo; f < hi; ++f) {
      int b = int(f % n);
      int a = int(f / n);
      for (int cc = 0; cc < n; ++cc)
        for (int d = 0; d < n; ++d) {
          auto dst = c.comp({a, b, cc, d});
          auto r = riem_low.comp({a, b, cc, d});
          std::copy(r.begin(), r.end(), dst.begin());
          auto term = [&](int gi, int gj, int pi, int pj, double sgn) {
            Jet tmp(c.space_ptr());
            jet_mul_acc(c.space(), deg, tmp.coeffs(), gt.comp({gi, gj}), pt.comp({pi, pj}));
            for (size_t k = 0; k < dst.size(); ++k) dst[k] += sgn * tmp.coeffs()[k];
          };
          term(cc, a, b, d, -1.0);
          term(cc, b, a, d, +1.0);
          term(d, b, a, cc, -1.0);
          term(d, a, b, cc, +1.0);
        }
    }
  });
  c.hints = {{SymKind::Skew, 0, 1}, {SymKind::Skew, 2, 3}, {SymKind::TraceFree, 0, 2}};
  return c;
}

TensorJet cotton(const TensorJet& schouten_p, const TensorJet& gamma) {
  const int n = schouten_p.dim();
  TensorJet dp = covariant_derivative(schouten_p, gamma); // [x][c][a] = grad_x P_ca
  TensorJet a(n, dp.degree(), {Var::Lo, Var::Lo, Var::Lo}, 0);
  for (int i = 0; i < n; ++i)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        auto dst = a.comp({i, b, c});
        auto t1 = dp.comp({b, c, i});
        auto t2 = dp.comp({c, b, i});
        for (size_t k = 0; k < dst.size(); ++k) dst[k] = t1[k] - t2[k];
      }
  a.hints = {{SymKind::Skew, 1, 2}};
  return a;
}

TensorJet bach(const TensorJet& cotton_a, const TensorJet& schouten_p,
               const TensorJet& weyl_c, const TensorJet& gamma, const TensorJet& g_inv) {
  const int n = cotton_a.dim();
  TensorJet da = covariant_derivative(cotton_a, gamma); // [x][a][c][b] = grad_x A_acb
  const int deg = da.degree();
  TensorJet b(n, deg, {Var::Lo, Var::Lo}, -2);
  TensorJet ginv_t = g_inv.truncated(deg);
  // P^{dc} raised
  TensorJet praised = raise_slot(raise_slot(schouten_p.truncated(deg), 0, ginv_t), 1, ginv_t);
  TensorJet ct = weyl_c.truncated(deg);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto dst = b.comp({i, j});
      for (int x = 0; x < n; ++x)
        for (int c = 0; c < n; ++c)
          jet_mul_acc(b.space(), deg, dst, ginv_t.comp({x, c}), da.comp({x, i, c, j}));
      for (int d = 0; d < n; ++d)
        for (int c = 0; c < n; ++c)
          jet_mul_acc(b.space(), deg, dst, praised.comp({d, c}), ct.comp({d, i, c, j}));
    }
  b.hints = {{SymKind::Symmetric, 0, 1}, {SymKind::TraceFree, 0, 1}};
  return b;
}

const TensorJet& CurvatureBundle::cotton_t() const {
  if (!A) throw degree_error("Cotton tensor needs metric degree >= 3");
  return *A;
}
const TensorJet& CurvatureBundle::bach_t() const {
  if (!B) throw degree_error("Bach tensor needs metric degree >= 4");
  return *B;
}

CurvatureBundle curvature_bundle(const LiftedMetric& lifted, std::span<const double> point) {
  CurvatureBundle cb;
  cb.dim = lifted.g.dim();
  cb.degree = lifted.g.degree();
  cb.point.assign(point.begin(), point.end());
  if (cb.degree < 2) throw degree_error("curvature bundle needs metric degree >= 2");
  cb.g = lifted.g;
  cb.g.set_weight(2); // conformal-representative bookkeeping
  cb.g_inv = lifted.g_inv;
  cb.g_inv.set_weight(-2);
  cb.gamma = christoffel(cb.g, cb.g_inv);
  cb.riem = riemann(cb.gamma);
  auto rs = ricci_scalar(cb.riem, cb.g_inv);
  cb.ricci = std::move(rs.first);
  cb.scal = std::move(rs.second);
  auto pj = schouten(cb.ricci, cb.scal, cb.g, cb.g_inv);
  cb.P = std::move(pj.first);
  cb.J = std::move(pj.second);
  cb.riem_low = lower_riemann(cb.riem, cb.g);
  cb.C = weyl(cb.riem_low, cb.P, cb.g);
  if (cb.degree >= 3) cb.A = cotton(cb.P, cb.gamma);
  if (cb.degree >= 4) cb.B = bach(*cb.A, cb.P, cb.C, cb.gamma, cb.g_inv);
  return cb;
}

CurvatureBundle curvature_bundle(const MetricSpec& spec, std::span<const double> point,
                                 int degree) {
  return curvature_bundle(lift_metric(spec, point, degree), point);
}

TensorJet laplacian(const TensorJet& t, const TensorJet& gamma, const TensorJet& g_inv) {
  TensorJet dd = covariant_derivative(covariant_derivative(t, gamma), gamma);
  TensorJet raised = raise_slot(dd, 0, g_inv.truncated(dd.degree()));
  TensorJet out = contract_slots(raised, 0, 1);
  out.set_weight(t.weight() - 2);
  return out;
}

TensorJet divergence_slot(const TensorJet& t, int slot, const TensorJet& gamma,
                          const TensorJet& g_inv) {
  TensorJet d = covariant_derivative(t, gamma);
  TensorJet raised = raise_slot(d, 0, g_inv.truncated(d.degree()));
  TensorJet out = contract_slots(raised, 0, slot + 1);
  out.set_weight(t.weight() - 2);
  return out;
}

} // namespace tractoria
