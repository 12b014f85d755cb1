#ifndef TRACTORIA_JET_HPP
#define TRACTORIA_JET_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tractoria/errors.hpp"

namespace tractoria {

// Truncated multivariate Taylor arithmetic. A Jet holds the coefficients
// c_alpha of f ~ sum c_alpha (x - p)^alpha over all multi-indices with
// |alpha| <= degree. Coefficients are plain monomial coefficients (no 1/alpha!
// factor); factorials enter only in derivative_value().
//
// Composition with analytic functions follows the truncated Horner scheme
// of Griewank & Walther, "Evaluating Derivatives", ch. 13.

using MultiIndex = std::vector<int>;

// Shared index bookkeeping for one (dim, degree) jet space. Monomials are
// enumerated in graded lexicographic order: by total degree, then
// lexicographically by exponent tuple. The enumeration for degree d is a
// prefix of the enumeration for any degree > d, so truncation is a prefix
// view and multiplication of mixed-degree jets needs no re-indexing.
class JetSpace {
public:
  static std::shared_ptr<const JetSpace> get(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return size_; }           // number of monomials
  int size_at(int deg) const { return sizes_[deg]; }

  std::span<const uint8_t> exponent(int idx) const {
    return {exps_.data() + size_t(idx) * dim_, size_t(dim_)};
  }
  int degree_of(int idx) const { return deg_of_[idx]; }

  // Index of a multi-index, or -1 when |alpha| > degree.
  int index_of(std::span<const int> alpha) const;

  // Row i of the multiplication table: monomial i times monomial j lands at
  // mul_row(i)[j], valid for j < size_at(degree - degree_of(i)).
  std::span<const uint32_t> mul_row(int i) const {
    return {mul_targets_.data() + mul_offsets_[i],
            mul_offsets_[i + 1] - mul_offsets_[i]};
  }

  // d/dx_i source table: coefficient t of the derivative pulls from
  // partial_src(i)[t] with factor partial_fac(i)[t].
  std::span<const uint32_t> partial_src(int i) const {
    return {partial_src_.data() + size_t(i) * sizes_[degree_ - 1],
            size_t(sizes_[degree_ - 1])};
  }
  std::span<const double> partial_fac(int i) const {
    return {partial_fac_.data() + size_t(i) * sizes_[degree_ - 1],
            size_t(sizes_[degree_ - 1])};
  }

  double factorial_of(int idx) const { return fact_[idx]; }  // alpha!

private:
  JetSpace(int dim, int degree);

  int dim_, degree_, size_;
  std::vector<int> sizes_;             // monomial count per degree bound
  std::vector<uint8_t> exps_;
  std::vector<uint8_t> deg_of_;
  std::vector<uint64_t> packed_;       // sorted packed exponents
  std::vector<uint32_t> packed_idx_;
  std::vector<uint32_t> mul_targets_;
  std::vector<size_t> mul_offsets_;
  std::vector<uint32_t> partial_src_;
  std::vector<double> partial_fac_;
  std::vector<double> fact_;
};

// out[0..size_at(deg)) += a * b truncated to total degree deg. All three
// spans live in spaces compatible with `space` (prefix property).
void jet_mul_acc(const JetSpace& space, int deg, std::span<double> out,
                 std::span<const double> a, std::span<const double> b);

class Jet {
public:
  Jet() = default;
  Jet(std::shared_ptr<const JetSpace> space, double constant = 0.0)
      : space_(std::move(space)), c_(space_->size(), 0.0) {
    c_[0] = constant;
  }

  static Jet constant(int dim, int degree, double v) {
    return Jet(JetSpace::get(dim, degree), v);
  }
  // The chart function x_i - p_i + p_i, i.e. value p_i and unit slope in x_i.
  static Jet coordinate(int dim, int degree, int i, double value);

  int dim() const { return space_->dim(); }
  int degree() const { return space_->degree(); }
  const JetSpace& space() const { return *space_; }
  std::shared_ptr<const JetSpace> space_ptr() const { return space_; }

  double value() const { return c_[0]; }
  double coeff(const MultiIndex& alpha) const;
  void set_coeff(const MultiIndex& alpha, double v);
  std::span<const double> coeffs() const { return c_; }
  std::span<double> coeffs() { return c_; }

  Jet truncated(int deg) const;

  double max_abs() const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);

private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator*(const Jet& a, double s);
Jet operator*(double s, const Jet& a);
Jet operator+(const Jet& a, double s);
Jet operator-(const Jet& a, double s);

// Truncated Cauchy product; result degree = min(a.degree, b.degree).
Jet operator*(const Jet& a, const Jet& b);
// a / b via composition with t -> 1/t; requires b.value() != 0.
Jet operator/(const Jet& a, const Jet& b);

enum class AnalyticFn { Exp, Log, Sin, Cos, Sqrt };

// Taylor composition f(a) truncated to a.degree. Log and Sqrt require a
// positive constant term.
Jet apply_analytic(AnalyticFn f, const Jet& a);

// a^r. Integer r works for any base (negative integer needs nonzero
// constant term); fractional r requires a positive constant term.
Jet jet_pow(const Jet& a, double r);

// d/dx_i, degree drops by one. Degree-0 input is an error.
Jet partial(const Jet& a, int i);

// Value of the |alpha|-th mixed partial at the base point: alpha! c_alpha.
double derivative_value(const Jet& a, const MultiIndex& alpha);

} // namespace tractoria

#endif
