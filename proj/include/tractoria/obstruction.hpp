#ifndef TRACTORIA_OBSTRUCTION_HPP
#define TRACTORIA_OBSTRUCTION_HPP

#include "tractoria/tractor.hpp"

namespace tractoria {

struct ObstructionResult {
  int dim = 0;
  TensorJet B;               // (0,2), weight 2-n
  std::string route;         // "direct" or "tractor"
  double scale = 1.0;        // max(1, largest term magnitude in the formula)
  double trace_residual = 0.0;
  double symmetry_residual = 0.0;
  std::optional<double> divergence_residual;
  std::optional<double> upper_slot_residual; // tractor route only
};

// K(n) of the tractor extraction: the obstruction sits in the bottom slot of
// the power Laplacian applied to the W-tractor, scaled by K(n). K(4) = -8;
// for even n >= 6, K(n) = (n-4) (n-2)(n-4)(-1)^{n/2-3} 2^{n-4} ((n/2-3)!)^2.
double kn_constant(int n);

// dim 4: -1/2 of the Bach tensor (needs metric degree >= 4)
ObstructionResult obstruction4(const CurvatureBundle& cb);

// dim 6 via the Levi-Civita formula in Bach/Cotton/Schouten/Weyl terms
// (needs metric degree >= 6; >= 7 for the divergence diagnostic)
ObstructionResult obstruction6_direct(const CurvatureBundle& cb);

// dim 6 via Box + (1/4) W## on the W-tractor, bottom-slot extraction
ObstructionResult obstruction6_tractor(const CurvatureBundle& cb);

// dim 8 via the 87-term Levi-Civita expansion (needs metric degree >= 8)
ObstructionResult obstruction8_direct(const CurvatureBundle& cb);

// dim 8 via the second-power conformal Laplacian on the W-tractor
ObstructionResult obstruction8_tractor(const CurvatureBundle& cb);

// dispatch by bundle dimension (4, 6, 8)
ObstructionResult obstruction_direct(const CurvatureBundle& cb);
ObstructionResult obstruction_tractor(const CurvatureBundle& cb);

// grad^a B_ab as a diagnostic; requires B jet degree >= 1
TensorJet obstruction_divergence(const TensorJet& b, const CurvatureBundle& cb);

// Leading-structure probe used by the perturbative sanity check:
// (1/16) Delta grad^c grad^d C_{cadb} evaluated on the bundle.
TensorJet dim6_leading_term(const CurvatureBundle& cb, int jet_degree = 0);

} // namespace tractoria

#endif
