#ifndef TRACTORIA_DEFCOMPLEX_HPP
#define TRACTORIA_DEFCOMPLEX_HPP

#include "tractoria/curvature.hpp"

namespace tractoria {

// Explicit operators of the conformal deformation complex acting on
// ordinary tensors. Conventions:
//   K(v)_{ab}   = sym trace-free part of grad v, v a weight-2 covector
//   Cstar(U)_{bd} = grad^{(a} grad^{c)} U_{abcd} + P^{ac} U_{abcd}
//   Bi(U)_{abcde} = (n-3) grad_[a U_{bc]de}
//                   - g_{d[a} grad^s U_{bc]se} + g_{e[a} grad^s U_{bc]sd}
// Antisymmetrization [.] averages with 1/k! weight. Each operator is pinned
// to exactly this normalization.

TensorJet conformal_killing(const TensorJet& v, const CurvatureBundle& cb);

// Requires U to carry Weyl-type symmetries; symmetry residual above
// 1e-6 * scale is rejected. In dimension 4 applied to the Weyl curvature
// this yields the Bach tensor.
TensorJet cstar(const TensorJet& u, const CurvatureBundle& cb);

TensorJet weyl_bianchi(const TensorJet& u, const CurvatureBundle& cb);

// Projection of an arbitrary (0,4) tensor onto algebraic Weyl tensors:
// Riemann symmetries plus total trace-freeness. Used to generate test
// inputs and to validate operator domains.
TensorJet project_weyl_symmetric(const TensorJet& t, const TensorJet& g,
                                 const TensorJet& g_inv);

// max over the defining symmetry residuals (skews, pair swap, first
// Bianchi, traces), not normalized.
double weyl_symmetry_residual(const TensorJet& u, const TensorJet& g_inv);

// Seeded random algebraic Weyl tensor with entries O(1), weight 2.
TensorJet random_weyl_tensor(const CurvatureBundle& cb, uint64_t seed, int degree);

} // namespace tractoria

#endif
