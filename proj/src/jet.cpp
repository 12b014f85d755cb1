#include "tractoria/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace tractoria {

namespace {

uint64_t pack_exponents(std::span<const uint8_t> e) {
  // 6 bits per coordinate: enough for degree <= 63, dim <= 10.
  uint64_t p = 0;
  for (size_t i = 0; i < e.size(); ++i) p |= uint64_t(e[i]) << (6 * i);
  return p;
}

uint64_t pack_ints(std::span<const int> e) {
  uint64_t p = 0;
  for (size_t i = 0; i < e.size(); ++i) p |= uint64_t(e[i]) << (6 * i);
  return p;
}

void enumerate(int dim, int degree, std::vector<uint8_t>& out) {
  // graded lex: total degree major, then ascending lexicographic on the tuple
  std::vector<int> a(dim, 0);
  for (int total = 0; total <= degree; ++total) {
    struct Rec {
      int dim;
      std::vector<uint8_t>& out;
      std::vector<int>& a;
      void go(int pos, int rem) {
        if (pos == dim - 1) {
          a[pos] = rem;
          for (int k = 0; k < dim; ++k) out.push_back(uint8_t(a[k]));
          return;
        }
        for (int v = 0; v <= rem; ++v) {
          a[pos] = v;
          go(pos + 1, rem - v);
        }
      }
    } rec{dim, out, a};
    rec.go(0, total);
  }
}

} // namespace

JetSpace::JetSpace(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || dim > 10 || degree < 0 || degree > 16)
    throw usage_error("jet space out of supported range (dim 1..10, degree 0..16)");

  enumerate(dim, degree, exps_);
  size_ = int(exps_.size() / dim);

  sizes_.assign(degree + 1, 0);
  deg_of_.resize(size_);
  fact_.resize(size_);
  for (int i = 0; i < size_; ++i) {
    auto e = exponent(i);
    int d = 0;
    double f = 1.0;
    for (int k = 0; k < dim; ++k) {
      d += e[k];
      for (int m = 2; m <= e[k]; ++m) f *= m;
    }
    deg_of_[i] = uint8_t(d);
    fact_[i] = f;
    for (int m = d; m <= degree; ++m) sizes_[m]++;
  }

  packed_.resize(size_);
  packed_idx_.resize(size_);
  std::vector<std::pair<uint64_t, uint32_t>> tmp(size_);
  for (int i = 0; i < size_; ++i) tmp[i] = {pack_exponents(exponent(i)), uint32_t(i)};
  std::sort(tmp.begin(), tmp.end());
  for (int i = 0; i < size_; ++i) {
    packed_[i] = tmp[i].first;
    packed_idx_[i] = tmp[i].second;
  }

  // multiplication table
  mul_offsets_.assign(size_ + 1, 0);
  for (int i = 0; i < size_; ++i)
    mul_offsets_[i + 1] = mul_offsets_[i] + sizes_[degree - deg_of_[i]];
  mul_targets_.resize(mul_offsets_[size_]);
  std::vector<int> sum(dim);
  for (int i = 0; i < size_; ++i) {
    auto ei = exponent(i);
    int jmax = sizes_[degree - deg_of_[i]];
    for (int j = 0; j < jmax; ++j) {
      auto ej = exponent(j);
      for (int k = 0; k < dim; ++k) sum[k] = ei[k] + ej[k];
      int t = index_of(sum);
      mul_targets_[mul_offsets_[i] + j] = uint32_t(t);
    }
  }

  // partial-derivative tables
  if (degree >= 1) {
    int nsrc = sizes_[degree - 1];
    partial_src_.resize(size_t(dim) * nsrc);
    partial_fac_.resize(size_t(dim) * nsrc);
    std::vector<int> up(dim);
    for (int c = 0; c < dim; ++c) {
      for (int t = 0; t < nsrc; ++t) {
        auto e = exponent(t);
        for (int k = 0; k < dim; ++k) up[k] = e[k];
        up[c] += 1;
        int s = index_of(up);
        partial_src_[size_t(c) * nsrc + t] = uint32_t(s);
        partial_fac_[size_t(c) * nsrc + t] = double(up[c]);
      }
    }
  }
}

int JetSpace::index_of(std::span<const int> alpha) const {
  int total = 0;
  for (int v : alpha) {
    if (v < 0) return -1;
    total += v;
  }
  if (total > degree_) return -1;
  uint64_t p = pack_ints(alpha);
  auto it = std::lower_bound(packed_.begin(), packed_.end(), p);
  if (it == packed_.end() || *it != p) return -1;
  return int(packed_idx_[it - packed_.begin()]);
}

std::shared_ptr<const JetSpace> JetSpace::get(int dim, int degree) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto key = std::make_pair(dim, degree);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sp = std::shared_ptr<const JetSpace>(new JetSpace(dim, degree));
  cache[key] = sp;
  return sp;
}

void jet_mul_acc(const JetSpace& space, int deg, std::span<double> out,
                 std::span<const double> a, std::span<const double> b) {
  const int imax = std::min<int>(int(a.size()), space.size_at(deg));
  const int bmax = int(b.size());
  for (int i = 0; i < imax; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    auto row = space.mul_row(i);
    int jmax = std::min(space.size_at(deg - space.degree_of(i)), bmax);
    const uint32_t* r = row.data();
    const double* bp = b.data();
    double* op = out.data();
    for (int j = 0; j < jmax; ++j) op[r[j]] += ai * bp[j];
  }
}

Jet Jet::coordinate(int dim, int degree, int i, double value) {
  if (i < 0 || i >= dim) throw usage_error("coordinate index out of range");
  Jet j(JetSpace::get(dim, degree), value);
  if (degree >= 1) {
    MultiIndex a(dim, 0);
    a[i] = 1;
    j.set_coeff(a, 1.0);
  }
  return j;
}

double Jet::coeff(const MultiIndex& alpha) const {
  int i = space_->index_of(alpha);
  if (i < 0) throw degree_error("multi-index beyond jet degree");
  return c_[i];
}

void Jet::set_coeff(const MultiIndex& alpha, double v) {
  int i = space_->index_of(alpha);
  if (i < 0) throw degree_error("multi-index beyond jet degree");
  c_[i] = v;
}

Jet Jet::truncated(int deg) const {
  if (deg >= degree()) return *this;
  if (deg < 0) throw usage_error("negative truncation degree");
  Jet r(JetSpace::get(dim(), deg));
  std::copy(c_.begin(), c_.begin() + r.space().size(), r.c_.begin());
  return r;
}

double Jet::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::fabs(v));
  return m;
}

namespace {
void check_dims(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim()) throw usage_error("jet dimension mismatch");
}
} // namespace

Jet& Jet::operator+=(const Jet& o) {
  check_dims(*this, o);
  if (o.degree() < degree()) *this = truncated(o.degree());
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.coeffs()[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_dims(*this, o);
  if (o.degree() < degree()) *this = truncated(o.degree());
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.coeffs()[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) { Jet r = a; r += b; return r; }
Jet operator-(const Jet& a, const Jet& b) { Jet r = a; r -= b; return r; }
Jet operator-(const Jet& a) { Jet r = a; r *= -1.0; return r; }
Jet operator*(const Jet& a, double s) { Jet r = a; r *= s; return r; }
Jet operator*(double s, const Jet& a) { return a * s; }
Jet operator+(const Jet& a, double s) {
  Jet r = a;
  r.coeffs()[0] += s;
  return r;
}
Jet operator-(const Jet& a, double s) { return a + (-s); }

Jet operator*(const Jet& a, const Jet& b) {
  check_dims(a, b);
  int deg = std::min(a.degree(), b.degree());
  Jet r(JetSpace::get(a.dim(), deg));
  jet_mul_acc(r.space(), deg, r.coeffs(), a.coeffs(), b.coeffs());
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * jet_pow(b, -1.0); }

namespace {

// Horner evaluation of sum_k d[k] * h^k where h has zero constant term.
Jet horner(const std::vector<double>& d, const Jet& h) {
  int n = int(d.size()) - 1;
  Jet acc = Jet(h.space_ptr(), d[n]);
  for (int k = n - 1; k >= 0; --k) {
    acc = acc * h;
    acc.coeffs()[0] += d[k];
  }
  return acc;
}

} // namespace

Jet apply_analytic(AnalyticFn f, const Jet& a) {
  const int n = a.degree();
  const double c = a.value();
  std::vector<double> d(n + 1); // f^(k)(c)/k!
  switch (f) {
    case AnalyticFn::Exp: {
      double e = std::exp(c), fk = 1.0;
      for (int k = 0; k <= n; ++k) {
        d[k] = e / fk;
        fk *= (k + 1);
      }
      break;
    }
    case AnalyticFn::Log: {
      if (c <= 0.0) throw numeric_error("log of non-positive jet constant term");
      d[0] = std::log(c);
      double p = 1.0;
      for (int k = 1; k <= n; ++k) {
        p *= c;
        d[k] = ((k % 2) ? 1.0 : -1.0) / (k * p);
      }
      break;
    }
    case AnalyticFn::Sin:
    case AnalyticFn::Cos: {
      double s = std::sin(c), co = std::cos(c);
      // derivatives cycle sin -> cos -> -sin -> -cos
      double cyc[4] = {s, co, -s, -co};
      int off = (f == AnalyticFn::Cos) ? 1 : 0;
      double fk = 1.0;
      for (int k = 0; k <= n; ++k) {
        d[k] = cyc[(k + off) % 4] / fk;
        fk *= (k + 1);
      }
      break;
    }
    case AnalyticFn::Sqrt:
      return jet_pow(a, 0.5);
  }
  Jet h = a;
  h.coeffs()[0] = 0.0;
  return horner(d, h);
}

Jet jet_pow(const Jet& a, double r) {
  const int n = a.degree();
  const double c = a.value();
  const bool integer = (r == std::floor(r)) && std::fabs(r) < 64;
  if (integer && r >= 0) {
    int e = int(r);
    Jet acc = Jet(a.space_ptr(), 1.0);
    Jet base = a;
    while (e > 0) { // binary powering keeps mult count low
      if (e & 1) acc = acc * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return acc;
  }
  if (integer) {
    if (c == 0.0) throw numeric_error("negative power of jet with zero constant term");
  } else if (c <= 0.0) {
    throw numeric_error("fractional power of jet with non-positive constant term");
  }
  std::vector<double> d(n + 1);
  double coef = std::pow(c, r);
  d[0] = coef;
  for (int k = 1; k <= n; ++k) {
    coef *= (r - (k - 1)) / (k * c);
    d[k] = coef;
  }
  Jet h = a;
  h.coeffs()[0] = 0.0;
  return horner(d, h);
}

Jet partial(const Jet& a, int i) {
  if (a.degree() < 1)
    throw degree_error("partial derivative of degree-0 jet would discard all information");
  if (i < 0 || i >= a.dim()) throw usage_error("coordinate index out of range");
  const JetSpace& sp = a.space();
  Jet r(JetSpace::get(a.dim(), a.degree() - 1));
  auto src = sp.partial_src(i);
  auto fac = sp.partial_fac(i);
  for (size_t t = 0; t < src.size(); ++t)
    r.coeffs()[t] = fac[t] * a.coeffs()[src[t]];
  return r;
}

double derivative_value(const Jet& a, const MultiIndex& alpha) {
  int i = a.space().index_of(alpha);
  if (i < 0) throw degree_error("derivative order exceeds jet degree");
  return a.space().factorial_of(i) * a.coeffs()[i];
}

} // namespace tractoria
