#include "tractoria/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tractoria {

namespace {
size_t ipow(size_t b, size_t e) {
  size_t r = 1;
  while (e--) r *= b;
  return r;
}
} // namespace

TensorJet::TensorJet(int dim, int degree, std::vector<Var> vars, int weight)
    : space_(JetSpace::get(dim, degree)),
      vars_(std::move(vars)),
      weight_(weight),
      ncomp_(ipow(size_t(dim), vars_.size())),
      data_(ncomp_ * size_t(space_->size()), 0.0) {}

int TensorJet::cov() const {
  return int(std::count(vars_.begin(), vars_.end(), Var::Lo));
}
int TensorJet::con() const { return rank() - cov(); }

size_t TensorJet::flat_index(std::span<const int> idx) const {
  size_t f = 0;
  for (size_t k = 0; k < idx.size(); ++k) f = f * dim() + size_t(idx[k]);
  return f;
}

Jet TensorJet::component_jet(std::span<const int> idx) const {
  Jet j(space_);
  auto c = comp(flat_index(idx));
  std::copy(c.begin(), c.end(), j.coeffs().begin());
  return j;
}

TensorJet TensorJet::truncated(int deg) const {
  if (deg >= degree()) return *this;
  TensorJet r(dim(), deg, vars_, weight_);
  for (size_t c = 0; c < ncomp_; ++c) {
    auto src = comp(c);
    auto dst = r.comp(c);
    std::copy(src.begin(), src.begin() + dst.size(), dst.begin());
  }
  r.hints = hints;
  return r;
}

double TensorJet::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

double TensorJet::max_abs_value() const {
  double m = 0.0;
  for (size_t c = 0; c < ncomp_; ++c) m = std::max(m, std::fabs(comp(c)[0]));
  return m;
}

namespace {
void check_shape(const TensorJet& a, const TensorJet& b) {
  if (a.dim() != b.dim() || a.vars() != b.vars())
    throw usage_error("tensor shape mismatch");
}
} // namespace

TensorJet& TensorJet::operator+=(const TensorJet& o) {
  check_shape(*this, o);
  if (o.degree() < degree()) *this = truncated(o.degree());
  for (size_t c = 0; c < ncomp_; ++c) {
    auto dst = comp(c);
    auto src = o.comp(c);
    for (size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return *this;
}

TensorJet& TensorJet::operator-=(const TensorJet& o) {
  check_shape(*this, o);
  if (o.degree() < degree()) *this = truncated(o.degree());
  for (size_t c = 0; c < ncomp_; ++c) {
    auto dst = comp(c);
    auto src = o.comp(c);
    for (size_t k = 0; k < dst.size(); ++k) dst[k] -= src[k];
  }
  return *this;
}

TensorJet& TensorJet::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

TensorJet operator+(const TensorJet& a, const TensorJet& b) {
  TensorJet r = (a.degree() <= b.degree()) ? a : a.truncated(b.degree());
  r += b;
  return r;
}
TensorJet operator-(const TensorJet& a, const TensorJet& b) {
  TensorJet r = (a.degree() <= b.degree()) ? a : a.truncated(b.degree());
  r -= b;
  return r;
}
TensorJet operator*(const TensorJet& a, double s) {
  TensorJet r = a;
  r *= s;
  return r;
}

TensorJet mul_scalar(const TensorJet& t, const Jet& s) {
  int deg = std::min(t.degree(), s.degree());
  TensorJet r(t.dim(), deg, t.vars(), t.weight());
  for (size_t c = 0; c < t.ncomp(); ++c)
    jet_mul_acc(r.space(), deg, r.comp(c), t.comp(c), s.coeffs());
  return r;
}

namespace {

TensorJet metric_slot_op(const TensorJet& t, int slot, const TensorJet& m,
                         Var want, Var produce, int dw) {
  if (t.vars()[slot] != want) throw usage_error("slot has wrong variance for raise/lower");
  int deg = std::min(t.degree(), m.degree());
  auto vars = t.vars();
  vars[slot] = produce;
  TensorJet r(t.dim(), deg, vars, t.weight() + dw);
  const int d = t.dim();
  size_t outer = 1, inner = 1;
  for (int k = 0; k < slot; ++k) outer *= d;
  for (int k = slot + 1; k < t.rank(); ++k) inner *= d;
  for (size_t o = 0; o < outer; ++o)
    for (int a = 0; a < d; ++a)
      for (size_t i = 0; i < inner; ++i) {
        size_t dst = (o * d + a) * inner + i;
        for (int b = 0; b < d; ++b) {
          size_t src = (o * d + b) * inner + i;
          jet_mul_acc(r.space(), deg, r.comp(dst), m.comp({a, b}), t.comp(src));
        }
      }
  return r;
}

} // namespace

TensorJet raise_slot(const TensorJet& t, int slot, const TensorJet& g_inv) {
  return metric_slot_op(t, slot, g_inv, Var::Lo, Var::Up, -2);
}

TensorJet lower_slot(const TensorJet& t, int slot, const TensorJet& g) {
  return metric_slot_op(t, slot, g, Var::Up, Var::Lo, +2);
}

TensorJet contract_slots(const TensorJet& t, int i, int j) {
  if (i == j) throw usage_error("cannot contract a slot with itself");
  if (i > j) std::swap(i, j);
  if (t.vars()[i] == t.vars()[j])
    throw usage_error("contraction needs one upper and one lower slot");
  const int d = t.dim();
  std::vector<Var> vars;
  for (int k = 0; k < t.rank(); ++k)
    if (k != i && k != j) vars.push_back(t.vars()[k]);
  TensorJet r(d, t.degree(), vars, t.weight());
  std::vector<int> idx(t.rank(), 0), oidx(vars.size(), 0);
  size_t nout = r.ncomp();
  for (size_t of = 0; of < nout; ++of) {
    size_t tmp = of;
    for (int k = int(vars.size()) - 1; k >= 0; --k) {
      oidx[k] = int(tmp % d);
      tmp /= d;
    }
    int p = 0;
    for (int k = 0; k < t.rank(); ++k)
      if (k != i && k != j) idx[k] = oidx[p++];
    auto out = r.comp(of);
    for (int s = 0; s < d; ++s) {
      idx[i] = idx[j] = s;
      auto src = t.comp(t.flat_index(idx));
      for (size_t k = 0; k < out.size(); ++k) out[k] += src[k];
    }
  }
  return r;
}

TensorJet contract_ab(const TensorJet& a, int aslot, const TensorJet& b, int bslot) {
  std::vector<const TensorJet*> ops{&a, &b};
  std::vector<std::pair<NetRef, NetRef>> pairs{{{0, aslot}, {1, bslot}}};
  std::vector<NetRef> out;
  for (int k = 0; k < a.rank(); ++k)
    if (k != aslot) out.push_back({0, k});
  for (int k = 0; k < b.rank(); ++k)
    if (k != bslot) out.push_back({1, k});
  return tensor_network(ops, pairs, out, a.weight() + b.weight());
}

TensorJet permute_slots(const TensorJet& t, std::span<const int> perm) {
  // out slot k holds what was at slot perm[k]
  const int d = t.dim();
  std::vector<Var> vars(t.rank());
  for (int k = 0; k < t.rank(); ++k) vars[k] = t.vars()[perm[k]];
  TensorJet r(d, t.degree(), vars, t.weight());
  std::vector<int> oidx(t.rank()), idx(t.rank());
  for (size_t of = 0; of < r.ncomp(); ++of) {
    size_t tmp = of;
    for (int k = t.rank() - 1; k >= 0; --k) {
      oidx[k] = int(tmp % d);
      tmp /= d;
    }
    for (int k = 0; k < t.rank(); ++k) idx[perm[k]] = oidx[k];
    auto src = t.comp(t.flat_index(idx));
    auto dst = r.comp(of);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return r;
}

namespace {

TensorJet sym_impl(const TensorJet& t, std::span<const int> slots, bool signed_perm) {
  std::vector<int> order(slots.begin(), slots.end());
  std::sort(order.begin(), order.end());
  TensorJet acc(t.dim(), t.degree(), t.vars(), t.weight());
  std::vector<int> perm(t.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> sub(order);
  int count = 0;
  do {
    for (size_t k = 0; k < order.size(); ++k) perm[order[k]] = sub[k];
    // parity of sub relative to sorted order
    double sign = 1.0;
    if (signed_perm) {
      auto s = sub;
      for (size_t x = 0; x < s.size(); ++x)
        for (size_t y = x + 1; y < s.size(); ++y)
          if (s[x] > s[y]) {
            std::swap(s[x], s[y]);
            sign = -sign;
          }
    }
    TensorJet p = permute_slots(t, perm);
    p *= sign;
    acc += p;
    ++count;
  } while (std::next_permutation(sub.begin(), sub.end()));
  acc *= 1.0 / count;
  return acc;
}

} // namespace

TensorJet symmetrize(const TensorJet& t, std::span<const int> slots) {
  return sym_impl(t, slots, false);
}
TensorJet antisymmetrize(const TensorJet& t, std::span<const int> slots) {
  return sym_impl(t, slots, true);
}

TensorJet tensor_network(std::span<const TensorJet* const> ops,
                         std::span<const std::pair<NetRef, NetRef>> pairs,
                         std::span<const NetRef> out_order, int weight) {
  const int nop = int(ops.size());
  const int d = ops[0]->dim();
  int deg = ops[0]->degree();
  for (auto* o : ops) deg = std::min(deg, o->degree());

  for (auto& pr : pairs) {
    Var v1 = ops[pr.first.op]->vars()[pr.first.slot];
    Var v2 = ops[pr.second.op]->vars()[pr.second.slot];
    if (v1 == v2) throw usage_error("network contraction needs opposite variances");
  }

  std::vector<Var> ovars;
  for (auto& r : out_order) ovars.push_back(ops[r.op]->vars()[r.slot]);
  TensorJet res(d, deg, ovars, weight);
  if (nop > 3) throw usage_error("tensor_network supports at most three operands");

  const int nfree = int(out_order.size());
  const int npair = int(pairs.size());

  // flat-index strides: component = base(free slots) + sum_k cidx_k * pair stride
  std::vector<std::vector<size_t>> stride(nop);
  for (int o = 0; o < nop; ++o) {
    stride[o].assign(ops[o]->rank(), 1);
    for (int s = ops[o]->rank() - 2; s >= 0; --s)
      stride[o][s] = stride[o][s + 1] * size_t(d);
  }
  std::vector<std::array<size_t, 3>> pair_stride(npair, {0, 0, 0});
  for (int k = 0; k < npair; ++k) {
    pair_stride[k][pairs[k].first.op] += stride[pairs[k].first.op][pairs[k].first.slot];
    pair_stride[k][pairs[k].second.op] +=
        stride[pairs[k].second.op][pairs[k].second.slot];
  }

  std::vector<int> fidx(nfree, 0), cidx(npair, 0);
  auto space = res.space_ptr();
  Jet scratch1(space);
  const bool scalar = (deg == 0);
  std::array<size_t, 3> base{};

  size_t ncomb = 1;
  for (int k = 0; k < npair; ++k) ncomb *= size_t(d);

  for (size_t of = 0; of < res.ncomp(); ++of) {
    size_t tmp = of;
    for (int k = nfree - 1; k >= 0; --k) {
      fidx[k] = int(tmp % d);
      tmp /= d;
    }
    base.fill(0);
    for (int k = 0; k < nfree; ++k)
      base[out_order[k].op] += size_t(fidx[k]) * stride[out_order[k].op][out_order[k].slot];
    auto out = res.comp(of);

    double acc0 = 0.0;
    for (size_t comb = 0; comb < ncomb; ++comb) {
      size_t t2 = comb;
      std::array<size_t, 3> flat = base;
      for (int k = npair - 1; k >= 0; --k) {
        size_t c = t2 % d;
        t2 /= d;
        flat[0] += c * pair_stride[k][0];
        flat[1] += c * pair_stride[k][1];
        flat[2] += c * pair_stride[k][2];
      }
      if (nop == 1) {
        auto a = ops[0]->comp(flat[0]);
        if (scalar)
          acc0 += a[0];
        else
          for (size_t k = 0; k < out.size(); ++k) out[k] += a[k];
      } else if (nop == 2) {
        auto a = ops[0]->comp(flat[0]);
        auto b = ops[1]->comp(flat[1]);
        if (scalar)
          acc0 += a[0] * b[0];
        else
          jet_mul_acc(*space, deg, out, a, b);
      } else {
        auto a = ops[0]->comp(flat[0]);
        auto b = ops[1]->comp(flat[1]);
        auto c = ops[2]->comp(flat[2]);
        if (scalar) {
          acc0 += a[0] * b[0] * c[0];
        } else {
          std::fill(scratch1.coeffs().begin(), scratch1.coeffs().end(), 0.0);
          jet_mul_acc(*space, deg, scratch1.coeffs(), a, b);
          jet_mul_acc(*space, deg, out, scratch1.coeffs(), c);
        }
      }
    }
    if (scalar) out[0] += acc0;
  }
  return res;
}

double max_abs(const TensorJet& t) { return t.max_abs(); }

double sym_residual(const TensorJet& t, int i, int j) {
  std::vector<int> perm(t.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[i], perm[j]);
  TensorJet s = permute_slots(t, perm);
  s -= t;
  return s.max_abs();
}

double skew_residual(const TensorJet& t, int i, int j) {
  std::vector<int> perm(t.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[i], perm[j]);
  TensorJet s = permute_slots(t, perm);
  s += t;
  return s.max_abs();
}

double trace_residual(const TensorJet& t, int i, int j, const TensorJet& g_inv) {
  TensorJet raised = raise_slot(t, i, g_inv);
  return contract_slots(raised, i, j).max_abs();
}

double hint_residual(const TensorJet& t, const TensorJet& g_inv) {
  double r = 0.0;
  for (const SymHint& h : t.hints) {
    switch (h.kind) {
      case SymKind::Symmetric: r = std::max(r, sym_residual(t, h.i, h.j)); break;
      case SymKind::Skew: r = std::max(r, skew_residual(t, h.i, h.j)); break;
      case SymKind::TraceFree:
        r = std::max(r, trace_residual(t, h.i, h.j, g_inv.truncated(t.degree())));
        break;
    }
  }
  return r;
}

} // namespace tractoria
