#ifndef TRACTORIA_CURVATURE_HPP
#define TRACTORIA_CURVATURE_HPP

#include <optional>

#include "tractoria/metric.hpp"
#include "tractoria/tensor.hpp"

namespace tractoria {

// Levi-Civita pipeline from a lifted metric. Index conventions:
//   Gamma^a_{bc}            stored (Up,Lo,Lo) as [a][b][c]
//   R_{ab}{}^c{}_d          stored (Lo,Lo,Up,Lo), from [del_a, del_b] v^c = R_ab^c_d v^d
//   R_{abcd} = g_{ce} R_{ab}{}^e{}_d
//   Ric_{bd} = R_{ab}{}^a{}_d,  Sc = g^{bd} Ric_{bd}
//   P_{ab} = (Ric_{ab} - J g_{ab}) / (n-2),  J = Sc / (2(n-1))
//   C_{abcd} = R_{abcd} - g_{ca} P_{bd} + g_{cb} P_{ad} - g_{db} P_{ac} + g_{da} P_{bc}
//   A_{abc} = grad_b P_{ca} - grad_c P_{ba}
//   B_{ab} = grad^c A_{acb} + P^{dc} C_{dacb}
//
// Conformal weights of the trivialized tensors: g +2, g_inv -2, lowered
// Riemann and Weyl +2, Ric and P and A 0, Sc and J -2, Bach -2. Derivatives
// keep the weight; raising/lowering shifts it by -2/+2 so total order
// (#lower - #upper - weight) is preserved.

TensorJet christoffel(const TensorJet& g, const TensorJet& g_inv);

// One new leading covariant slot; degree drops by one. target_degree may
// further truncate the result (used to keep deep pipelines cheap).
TensorJet covariant_derivative(const TensorJet& t, const TensorJet& gamma,
                               int target_degree = -1);

TensorJet riemann(const TensorJet& gamma);

std::pair<TensorJet, Jet> ricci_scalar(const TensorJet& riem, const TensorJet& g_inv);

std::pair<TensorJet, Jet> schouten(const TensorJet& ricci, const Jet& scal,
                                   const TensorJet& g, const TensorJet& g_inv);

TensorJet lower_riemann(const TensorJet& riem, const TensorJet& g);

TensorJet weyl(const TensorJet& riem_low, const TensorJet& schouten_p, const TensorJet& g);

TensorJet cotton(const TensorJet& schouten_p, const TensorJet& gamma);

TensorJet bach(const TensorJet& cotton_a, const TensorJet& schouten_p,
               const TensorJet& weyl_c, const TensorJet& gamma, const TensorJet& g_inv);

struct CurvatureBundle {
  int dim = 0;
  int degree = 0; // metric jet degree
  std::vector<double> point;
  TensorJet g, g_inv;
  TensorJet gamma;
  TensorJet riem;      // mixed
  TensorJet riem_low;
  TensorJet ricci;
  Jet scal;
  TensorJet P;
  Jet J;
  TensorJet C;
  std::optional<TensorJet> A; // needs degree >= 3
  std::optional<TensorJet> B; // needs degree >= 4

  const TensorJet& cotton_t() const;
  const TensorJet& bach_t() const;
};

// Build the full pipeline at one point. Requires degree >= 2; Cotton and
// Bach are filled when the degree allows.
CurvatureBundle curvature_bundle(const MetricSpec& spec, std::span<const double> point,
                                 int degree);
CurvatureBundle curvature_bundle(const LiftedMetric& lifted, std::span<const double> point);

// g^{ab} grad_a grad_b T (tractor-free covariant Laplacian).
TensorJet laplacian(const TensorJet& t, const TensorJet& gamma, const TensorJet& g_inv);

// grad^x T_{x ...} on the given slot: raise the new derivative slot and
// contract with `slot`.
TensorJet divergence_slot(const TensorJet& t, int slot, const TensorJet& gamma,
                          const TensorJet& g_inv);

} // namespace tractoria

#endif
