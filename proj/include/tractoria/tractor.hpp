#ifndef TRACTORIA_TRACTOR_HPP
#define TRACTORIA_TRACTOR_HPP

#include <map>
#include <optional>
#include <string>

#include "tractoria/curvature.hpp"

namespace tractoria {

// Tractor calculus in a chosen scale, in slot-word form.
//
// A valence-k tractor of weight w is stored lowered, as a map from words
// over the letters {Y, Z, X} (one letter per tractor slot) to component
// TensorJets: the word assembles the projector product, each Z letter owning
// one lowered tensor index, in word order. `extra` counts leading tensor
// indices not owned by any letter (derivative slots).
//
// Slot algebra (inverse tractor metric between lowered slots):
//   X-Y and Y-X pair to 1, Z-Z contracts the owned indices with g^{-1},
//   every other letter pair vanishes.
// Contraction with a projector reads one letter off a slot:
//   Y^A picks the X letter (weight -1), X^A picks Y (weight +1),
//   Z^A_a picks Z and releases its owned index (weight +1).
// The component of word s carries conformal weight w + #Y - #X + #Z.
//
// The connection acts per letter:
//   grad_a X_A = Z_Aa,  grad_a Z_Ab = -P_ab X_A - Y_A g_ab,
//   grad_a Y_A = P_ab Z_A{}^b
// and by the Levi-Civita connection on component slots.

struct Scale {
  const CurvatureBundle* cb = nullptr;
  const CurvatureBundle& bundle() const {
    if (!cb) throw usage_error("empty scale");
    return *cb;
  }
};

class TractorJet {
public:
  TractorJet() = default;
  TractorJet(int dim, int valence, int weight, int degree, int extra = 0)
      : dim_(dim), valence_(valence), weight_(weight), degree_(degree), extra_(extra) {}

  int dim() const { return dim_; }
  int valence() const { return valence_; }
  int weight() const { return weight_; }
  int degree() const { return degree_; }
  int extra() const { return extra_; }

  // letters: 'Y', 'Z', 'X'; component rank = extra + #Z
  std::map<std::string, TensorJet> slots;

  int component_weight(const std::string& word) const;
  std::vector<Var> component_vars(const std::string& word) const;

  void accumulate(const std::string& word, const TensorJet& t, double coef = 1.0);
  // zero component of the right shape when the word is absent
  TensorJet word_component(const std::string& word) const;

  TractorJet truncated(int deg) const;
  double max_abs() const;
  TractorJet& operator+=(const TractorJet& o);
  TractorJet& operator-=(const TractorJet& o);
  TractorJet& operator*=(double s);

private:
  int dim_ = 0, valence_ = 0, weight_ = 0, degree_ = 0, extra_ = 0;
};

TractorJet operator+(const TractorJet& a, const TractorJet& b);
TractorJet operator-(const TractorJet& a, const TractorJet& b);
TractorJet operator*(const TractorJet& a, double s);

// index of the component slot owned by the Z at word position p
int z_index_position(const std::string& word, int extra, int p);

// ---- structural operations ----

struct TrSlotRef {
  int op;
  int slot;
};

// Memoizes index raisings of slot components across the many contractions
// of one hash evaluation; keyed by component identity, so it must not
// outlive the tractors it was used with.
struct TractorNetCache {
  std::map<std::pair<const void*, int>, TensorJet> raised;
};

// General contraction network: join up to two tractors, h^{-1}-contracting
// the listed slot pairs (self pairs allowed), output slots ordered as given.
// Extras pass through, leading, in operand order.
TractorJet tractor_network(std::span<const TractorJet* const> ops,
                           std::span<const std::pair<TrSlotRef, TrSlotRef>> pairs,
                           std::span<const TrSlotRef> out_slots,
                           const TensorJet& g_inv, int out_degree = -1,
                           TractorNetCache* cache = nullptr);

TractorJet tractor_contract(const TractorJet& u, int uslot, const TractorJet& v,
                            int vslot, const TensorJet& g_inv);
TractorJet tractor_trace(const TractorJet& u, int i, int j, const TensorJet& g_inv);
TractorJet tractor_permute(const TractorJet& u, std::span<const int> perm);

// full h-pairing of two equal-valence tractors (all slots contracted in order)
TensorJet tractor_pairing(const TractorJet& u, const TractorJet& v,
                          const TensorJet& g_inv);

// multiplication by a projector: new leading slot
TractorJet prepend_x(const TractorJet& v); // X_A V, weight +1
TractorJet prepend_y(const TractorJet& v); // Y_A V, weight -1

// contraction with a projector on one slot
TractorJet contract_y(const TractorJet& v, int slot); // Y^A: picks X letters
TractorJet contract_x(const TractorJet& v, int slot); // X^A: picks Y letters
// Z^A_a: picks Z letters; the released index becomes the last extra slot? No:
// it becomes the leading extra index of the result.
TractorJet contract_z(const TractorJet& v, int slot);

// ---- the calculus ----

// tractor metric h as a valence-2 weight-0 tractor
TractorJet tractor_metric(const Scale& s, int degree);

// coupled connection; one extra leading tensor slot, degree drops by one
TractorJet tractor_connection(const TractorJet& v, const Scale& s);

// Box V = Delta V + w J V, tractor-coupled; degree drops by two
TractorJet tractor_box(const TractorJet& v, const Scale& s);

// D_A V = (n+2w-2) w Y_A V + (n+2w-2) Z_A{}^a grad_a V - X_A Box V
TractorJet tractor_D(const TractorJet& v, const Scale& s);

// The W-tractor: valence 4, weight -2, packaging Weyl, Cotton and Bach.
// Needs metric degree >= 4.
TractorJet w_tractor(const Scale& s);

// Double hash action of a valence-4 tractor R (endomorphism pairs on slots
// (0,1) and (2,3)) on all tractor slots of T.
TractorJet hash_double(const TractorJet& r, const TractorJet& t, const TensorJet& g_inv);

// sum_I (D_I A)## (D^I B) with the I slots contracted between the operands
// and excluded from the hash (both operands valence 5, slot 0 = I).
TractorJet hash_double_rider(const TractorJet& da, const TractorJet& db,
                             const TensorJet& g_inv);

// Box + alpha/(n-4) W## on weight (1 - n/2) tractors; n = 4 is excluded.
TractorJet box1_alpha(const TractorJet& t, double alpha, const Scale& s,
                      const TractorJet* w_opt = nullptr);

// The second-power conformal Laplacian on valence-4 weight -2 tractors in
// dimension 8: -Y Box D T - (1/2) Y W D T (four placements)
// - (1/64) Y W##X W##T + (1/64)(W##W)##T + (1/16)(D_I W)##D^I T
// + (1/32) W##W##T.
TractorJet box2_dim8(const TractorJet& t, const Scale& s,
                     const TractorJet* w_opt = nullptr);

// Differential splitting of an algebraic Weyl tensor into a valence-4
// weight -2 tractor; on the Weyl curvature it returns (n-3) W.
TractorJet di_splitting(const TensorJet& u, const Scale& s);

// ---- scale changes ----

struct RescaleData {
  Jet omega;        // jet of the conformal factor at the point
  Jet exp_omega;    // e^omega
  TensorJet ups;    // Upsilon_a = grad_a omega, (0,1)
  TensorJet ups_up; // Upsilon^a in the base scale
  Jet ups2;         // |Upsilon|^2 in the base scale
};

RescaleData make_rescale_data(const ConformalFactor& cf, const CurvatureBundle& base,
                              int degree);

// Push the slot components of an invariant tractor from the base scale g to
// the scale e^{2 omega} g, including the density retrivialization factors
// e^{(component weight) omega}.
TractorJet rescale_components(const TractorJet& v, const RescaleData& rd);

} // namespace tractoria

#endif
