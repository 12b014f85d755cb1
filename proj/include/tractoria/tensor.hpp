#ifndef TRACTORIA_TENSOR_HPP
#define TRACTORIA_TENSOR_HPP

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tractoria/jet.hpp"

namespace tractoria {

enum class Var : uint8_t { Lo, Up };

enum class SymKind : uint8_t { Symmetric, Skew, TraceFree };
struct SymHint {
  SymKind kind;
  int i, j;
};

// A tensor field germ: one Jet per component, all sharing (dim, degree).
// Component storage is row-major over the slot tuple, a single flat buffer.
// `weight` is the conformal weight of the trivialized tensor in the working
// scale; it never affects in-scale arithmetic, only scale changes and the
// total-order bookkeeping (#lower - #upper - weight).
class TensorJet {
public:
  TensorJet() = default;
  TensorJet(int dim, int degree, std::vector<Var> vars, int weight);

  int dim() const { return space_->dim(); }
  int degree() const { return space_->degree(); }
  int rank() const { return int(vars_.size()); }
  int weight() const { return weight_; }
  void set_weight(int w) { weight_ = w; }
  const std::vector<Var>& vars() const { return vars_; }
  int cov() const;
  int con() const;
  int total_order() const { return cov() - con() - weight_; }
  const JetSpace& space() const { return *space_; }
  std::shared_ptr<const JetSpace> space_ptr() const { return space_; }
  size_t ncomp() const { return ncomp_; }
  int jetlen() const { return space_->size(); }

  std::span<double> comp(size_t flat) {
    return {data_.data() + flat * jetlen(), size_t(jetlen())};
  }
  std::span<const double> comp(size_t flat) const {
    return {data_.data() + flat * jetlen(), size_t(jetlen())};
  }
  size_t flat_index(std::span<const int> idx) const;
  std::span<double> comp(std::initializer_list<int> idx) {
    return comp(flat_index({idx.begin(), idx.size()}));
  }
  std::span<const double> comp(std::initializer_list<int> idx) const {
    return comp(flat_index({idx.begin(), idx.size()}));
  }

  Jet component_jet(std::span<const int> idx) const;
  double value(std::span<const int> idx) const { return comp(flat_index(idx))[0]; }
  double value(std::initializer_list<int> idx) const {
    return value(std::span<const int>{idx.begin(), idx.size()});
  }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  TensorJet truncated(int deg) const;
  double max_abs() const;
  double max_abs_value() const; // over degree-0 coefficients only

  TensorJet& operator+=(const TensorJet& o);
  TensorJet& operator-=(const TensorJet& o);
  TensorJet& operator*=(double s);

  std::vector<SymHint> hints;

private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<Var> vars_;
  int weight_ = 0;
  size_t ncomp_ = 0;
  std::vector<double> data_;
};

TensorJet operator+(const TensorJet& a, const TensorJet& b);
TensorJet operator-(const TensorJet& a, const TensorJet& b);
TensorJet operator*(const TensorJet& a, double s);

// Pointwise product with a scalar jet, degree truncated to the smaller.
TensorJet mul_scalar(const TensorJet& t, const Jet& s);

// Raise or lower slot `slot` with the given (2,0) or (0,2) metric tensor;
// weight shifts by -2 / +2 so the total order is unchanged.
TensorJet raise_slot(const TensorJet& t, int slot, const TensorJet& g_inv);
TensorJet lower_slot(const TensorJet& t, int slot, const TensorJet& g);

// Contract slots i and j (one Up, one Lo) by a plain delta sum.
TensorJet contract_slots(const TensorJet& t, int i, int j);

// Contract the last slot of a with slot bslot of b (one Up, one Lo);
// remaining slots ordered a-first. Convenience over tensor_network.
TensorJet contract_ab(const TensorJet& a, int aslot, const TensorJet& b, int bslot);

TensorJet permute_slots(const TensorJet& t, std::span<const int> perm);

// Average over all permutations (symmetrize) or signed permutations
// (antisymmetrize, 1/k! normalization) of the listed slots.
TensorJet symmetrize(const TensorJet& t, std::span<const int> slots);
TensorJet antisymmetrize(const TensorJet& t, std::span<const int> slots);

struct NetRef {
  int op;   // operand number
  int slot; // slot within that operand
};

// General contraction network over up to three operands: delta-contract the
// listed slot pairs (one Up, one Lo each) and lay out the remaining slots in
// `out_order`. Brute-force evaluation; meant for low-degree jets.
TensorJet tensor_network(std::span<const TensorJet* const> ops,
                         std::span<const std::pair<NetRef, NetRef>> pairs,
                         std::span<const NetRef> out_order, int weight);

double max_abs(const TensorJet& t);

// Residual checks used for symmetry hints and test assertions. Each returns
// max |violation| (not normalized).
double sym_residual(const TensorJet& t, int i, int j);
double skew_residual(const TensorJet& t, int i, int j);
double trace_residual(const TensorJet& t, int i, int j, const TensorJet& g_inv);

// max violation over all declared hints of t
double hint_residual(const TensorJet& t, const TensorJet& g_inv);

} // namespace tractoria

#endif
