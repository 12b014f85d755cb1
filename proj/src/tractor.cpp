#include "tractoria/tractor.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numeric>

namespace tractoria {

namespace {
int count_char(const std::string& w, char c) {
  return int(std::count(w.begin(), w.end(), c));
}
} // namespace

int TractorJet::component_weight(const std::string& word) const {
  return weight_ + count_char(word, 'Y') - count_char(word, 'X') + count_char(word, 'Z');
}

std::vector<Var> TractorJet::component_vars(const std::string& word) const {
  std::vector<Var> v(size_t(extra_) + size_t(count_char(word, 'Z')), Var::Lo);
  return v;
}

int z_index_position(const std::string& word, int extra, int p) {
  int r = 0;
  for (int k = 0; k < p; ++k)
    if (word[k] == 'Z') ++r;
  return extra + r;
}

void TractorJet::accumulate(const std::string& word, const TensorJet& t, double coef) {
  if (int(word.size()) != valence_) throw usage_error("slot word has wrong length");
  auto vars = component_vars(word);
  if (t.rank() != int(vars.size()) || t.dim() != dim_)
    throw usage_error("tractor component has wrong shape for word " + word);
  TensorJet tt = (t.degree() > degree_) ? t.truncated(degree_) : t;
  if (tt.degree() < degree_)
    throw usage_error("tractor component degree below tractor degree");
  if (coef != 1.0) tt *= coef;
  tt.set_weight(component_weight(word));
  auto it = slots.find(word);
  if (it == slots.end())
    slots.emplace(word, std::move(tt));
  else
    it->second += tt;
}

TensorJet TractorJet::word_component(const std::string& word) const {
  auto it = slots.find(word);
  if (it != slots.end()) return it->second;
  return TensorJet(dim_, degree_, component_vars(word), component_weight(word));
}

TractorJet TractorJet::truncated(int deg) const {
  if (deg >= degree_) return *this;
  TractorJet r(dim_, valence_, weight_, deg, extra_);
  for (auto& [w, t] : slots) r.slots.emplace(w, t.truncated(deg));
  return r;
}

double TractorJet::max_abs() const {
  double m = 0.0;
  for (auto& [w, t] : slots) m = std::max(m, t.max_abs());
  return m;
}

TractorJet& TractorJet::operator+=(const TractorJet& o) {
  if (valence_ != o.valence_ || dim_ != o.dim_ || extra_ != o.extra_ ||
      weight_ != o.weight_)
    throw usage_error("tractor shape mismatch in addition");
  if (o.degree_ < degree_) *this = truncated(o.degree_);
  for (auto& [w, t] : o.slots) accumulate(w, t);
  return *this;
}

TractorJet& TractorJet::operator-=(const TractorJet& o) {
  if (valence_ != o.valence_ || dim_ != o.dim_ || extra_ != o.extra_ ||
      weight_ != o.weight_)
    throw usage_error("tractor shape mismatch in subtraction");
  if (o.degree_ < degree_) *this = truncated(o.degree_);
  for (auto& [w, t] : o.slots) accumulate(w, t, -1.0);
  return *this;
}

TractorJet& TractorJet::operator*=(double s) {
  for (auto& [w, t] : slots) t *= s;
  return *this;
}

TractorJet operator+(const TractorJet& a, const TractorJet& b) {
  TractorJet r = (a.degree() <= b.degree()) ? a : a.truncated(b.degree());
  r += b;
  return r;
}
TractorJet operator-(const TractorJet& a, const TractorJet& b) {
  TractorJet r = (a.degree() <= b.degree()) ? a : a.truncated(b.degree());
  r -= b;
  return r;
}
TractorJet operator*(const TractorJet& a, double s) {
  TractorJet r = a;
  r *= s;
  return r;
}

// ---------------------------------------------------------------- network

TractorJet tractor_network(std::span<const TractorJet* const> ops,
                           std::span<const std::pair<TrSlotRef, TrSlotRef>> pairs,
                           std::span<const TrSlotRef> out_slots,
                           const TensorJet& g_inv, int out_degree,
                           TractorNetCache* cache) {
  const int nop = int(ops.size());
  if (nop < 1 || nop > 2) throw usage_error("tractor_network supports 1 or 2 operands");
  const int dim = ops[0]->dim();
  int deg = ops[0]->degree();
  int extra_total = 0, weight_total = 0;
  for (auto* o : ops) {
    deg = std::min(deg, o->degree());
    extra_total += o->extra();
    weight_total += o->weight();
  }
  if (out_degree >= 0) deg = std::min(deg, out_degree);
  TractorJet res(dim, int(out_slots.size()), weight_total, deg, extra_total);
  TensorJet ginv_t = g_inv.truncated(deg);

  // iterate over word combinations, skipping identically-zero components
  std::vector<std::vector<std::string>> words(nop);
  for (int o = 0; o < nop; ++o)
    for (auto& [w, t] : ops[o]->slots)
      if (t.max_abs() != 0.0) words[o].push_back(w);

  std::vector<const std::string*> combo(nop);
  auto process = [&]() {
    // letter compatibility of every contraction pair
    struct ZZ {
      int op1, pos1, op2, pos2; // component index positions
    };
    std::vector<ZZ> zz;
    for (auto& pr : pairs) {
      char l1 = (*combo[pr.first.op])[pr.first.slot];
      char l2 = (*combo[pr.second.op])[pr.second.slot];
      if ((l1 == 'X' && l2 == 'Y') || (l1 == 'Y' && l2 == 'X')) continue;
      if (l1 == 'Z' && l2 == 'Z') {
        zz.push_back({pr.first.op,
                      z_index_position(*combo[pr.first.op], ops[pr.first.op]->extra(),
                                       pr.first.slot),
                      pr.second.op,
                      z_index_position(*combo[pr.second.op], ops[pr.second.op]->extra(),
                                       pr.second.slot)});
        continue;
      }
      return; // pairing vanishes
    }

    // raise the first member of every Z-Z pair; memoized when a cache is given
    std::array<const TensorJet*, 2> srcs{};
    std::array<TensorJet, 2> local;
    for (int o = 0; o < nop; ++o) srcs[o] = &ops[o]->slots.at(*combo[o]);
    for (auto& p : zz) {
      const TensorJet* base = srcs[p.op1];
      if (cache) {
        auto key = std::make_pair(static_cast<const void*>(base), p.pos1);
        auto it = cache->raised.find(key);
        if (it == cache->raised.end())
          it = cache->raised.emplace(key, raise_slot(*base, p.pos1, ginv_t)).first;
        srcs[p.op1] = &it->second;
      } else {
        local[p.op1] = raise_slot(*base, p.pos1, ginv_t);
        srcs[p.op1] = &local[p.op1];
      }
    }

    // delta pairs for the tensor network
    std::vector<std::pair<NetRef, NetRef>> tpairs;
    for (auto& p : zz) tpairs.push_back({{p.op1, p.pos1}, {p.op2, p.pos2}});

    // output word and component order
    std::string outw;
    std::vector<NetRef> order;
    for (int o = 0; o < nop; ++o)
      for (int e = 0; e < ops[o]->extra(); ++e) order.push_back({o, e});
    for (auto& r : out_slots) {
      char l = (*combo[r.op])[r.slot];
      outw += l;
      if (l == 'Z')
        order.push_back({r.op, z_index_position(*combo[r.op], ops[r.op]->extra(), r.slot)});
    }

    std::vector<const TensorJet*> tops;
    for (int o = 0; o < nop; ++o) tops.push_back(srcs[o]);
    TensorJet t = tensor_network(tops, tpairs, order, 0);
    res.accumulate(outw, t);
  };

  // nested loops over word lists
  if (nop == 1) {
    for (auto& w0 : words[0]) {
      combo[0] = &w0;
      process();
    }
  } else {
    for (auto& w0 : words[0])
      for (auto& w1 : words[1]) {
        combo[0] = &w0;
        combo[1] = &w1;
        process();
      }
  }
  return res;
}

TractorJet tractor_contract(const TractorJet& u, int uslot, const TractorJet& v,
                            int vslot, const TensorJet& g_inv) {
  std::array<const TractorJet*, 2> ops{&u, &v};
  std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{{{0, uslot}, {1, vslot}}};
  std::vector<TrSlotRef> out;
  for (int k = 0; k < u.valence(); ++k)
    if (k != uslot) out.push_back({0, k});
  for (int k = 0; k < v.valence(); ++k)
    if (k != vslot) out.push_back({1, k});
  return tractor_network(ops, pairs, out, g_inv);
}

TractorJet tractor_trace(const TractorJet& u, int i, int j, const TensorJet& g_inv) {
  std::array<const TractorJet*, 1> ops{&u};
  std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{{{0, i}, {0, j}}};
  std::vector<TrSlotRef> out;
  for (int k = 0; k < u.valence(); ++k)
    if (k != i && k != j) out.push_back({0, k});
  return tractor_network(ops, pairs, out, g_inv);
}

TractorJet tractor_permute(const TractorJet& u, std::span<const int> perm) {
  TractorJet r(u.dim(), u.valence(), u.weight(), u.degree(), u.extra());
  for (auto& [w, t] : u.slots) {
    std::string nw(w.size(), '?');
    for (size_t k = 0; k < w.size(); ++k) nw[k] = w[perm[k]];
    // component index permutation: extras stay, Z indices follow their letters
    std::vector<int> cperm;
    for (int e = 0; e < u.extra(); ++e) cperm.push_back(e);
    for (size_t k = 0; k < nw.size(); ++k)
      if (nw[k] == 'Z') cperm.push_back(z_index_position(w, u.extra(), perm[k]));
    r.accumulate(nw, permute_slots(t, cperm));
  }
  return r;
}

TensorJet tractor_pairing(const TractorJet& u, const TractorJet& v,
                          const TensorJet& g_inv) {
  if (u.valence() != v.valence()) throw usage_error("pairing needs equal valence");
  std::array<const TractorJet*, 2> ops{&u, &v};
  std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs;
  for (int k = 0; k < u.valence(); ++k) pairs.push_back({{0, k}, {1, k}});
  TractorJet s = tractor_network(ops, pairs, {}, g_inv);
  return s.word_component("");
}

TractorJet prepend_x(const TractorJet& v) {
  TractorJet r(v.dim(), v.valence() + 1, v.weight() + 1, v.degree(), v.extra());
  for (auto& [w, t] : v.slots) r.accumulate("X" + w, t);
  return r;
}

TractorJet prepend_y(const TractorJet& v) {
  TractorJet r(v.dim(), v.valence() + 1, v.weight() - 1, v.degree(), v.extra());
  for (auto& [w, t] : v.slots) r.accumulate("Y" + w, t);
  return r;
}

namespace {
TractorJet contract_letter(const TractorJet& v, int slot, char letter, int dweight) {
  TractorJet r(v.dim(), v.valence() - 1, v.weight() + dweight, v.degree(), v.extra());
  for (auto& [w, t] : v.slots) {
    if (w[slot] != letter) continue;
    std::string nw = w.substr(0, slot) + w.substr(slot + 1);
    r.accumulate(nw, t);
  }
  return r;
}
} // namespace

TractorJet contract_y(const TractorJet& v, int slot) {
  return contract_letter(v, slot, 'X', -1);
}
TractorJet contract_x(const TractorJet& v, int slot) {
  return contract_letter(v, slot, 'Y', +1);
}

TractorJet contract_z(const TractorJet& v, int slot) {
  TractorJet r(v.dim(), v.valence() - 1, v.weight() + 1, v.degree(), v.extra() + 1);
  for (auto& [w, t] : v.slots) {
    if (w[slot] != 'Z') continue;
    std::string nw = w.substr(0, slot) + w.substr(slot + 1);
    int pos = z_index_position(w, v.extra(), slot);
    std::vector<int> perm;
    perm.push_back(pos); // released index leads
    for (int k = 0; k < t.rank(); ++k)
      if (k != pos) perm.push_back(k);
    r.accumulate(nw, permute_slots(t, perm));
  }
  return r;
}

// ------------------------------------------------------------- calculus

TractorJet tractor_metric(const Scale& s, int degree) {
  const CurvatureBundle& cb = s.bundle();
  TractorJet h(cb.dim, 2, 0, degree);
  TensorJet one(cb.dim, degree, {}, 0);
  one.comp(size_t(0))[0] = 1.0;
  h.accumulate("YX", one);
  h.accumulate("XY", one);
  TensorJet gt = cb.g.truncated(degree);
  gt.set_weight(2);
  h.accumulate("ZZ", gt);
  return h;
}

namespace {

// out[a, idx-with-b-inserted-at-`at`] = M[a][b] * f[idx]
TensorJet lead_insert_mul(const TensorJet& m, const TensorJet& f, int at, int deg) {
  const int n = f.dim();
  std::vector<Var> vars(size_t(f.rank()) + 2, Var::Lo);
  TensorJet out(n, deg, vars, 0);
  std::vector<int> fidx(f.rank()), oidx(f.rank() + 2);
  for (size_t c = 0; c < f.ncomp(); ++c) {
    size_t tmp = c;
    for (int k = f.rank() - 1; k >= 0; --k) {
      fidx[k] = int(tmp % n);
      tmp /= n;
    }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        oidx[0] = a;
        int p = 1;
        for (int k = 0; k < f.rank() + 1; ++k) {
          if (k == at)
            oidx[p++] = b;
          else
            oidx[p++] = fidx[k - (k > at ? 1 : 0)];
        }
        jet_mul_acc(out.space(), deg, out.comp(out.flat_index(oidx)), m.comp({a, b}),
                    f.comp(c));
      }
  }
  return out;
}

// out[a, idx-minus-`at`] = sum_b Mr[a][b] * f[.. b at `at` ..]
TensorJet lead_contract_mul(const TensorJet& mr, const TensorJet& f, int at, int deg) {
  const int n = f.dim();
  std::vector<Var> vars(size_t(f.rank()), Var::Lo);
  TensorJet out(n, deg, vars, 0);
  std::vector<int> fidx(f.rank()), oidx(f.rank());
  for (size_t c = 0; c < f.ncomp(); ++c) {
    size_t tmp = c;
    for (int k = f.rank() - 1; k >= 0; --k) {
      fidx[k] = int(tmp % n);
      tmp /= n;
    }
    int b = fidx[at];
    for (int a = 0; a < n; ++a) {
      oidx[0] = a;
      int p = 1;
      for (int k = 0; k < f.rank(); ++k)
        if (k != at) oidx[p++] = fidx[k];
      jet_mul_acc(out.space(), deg, out.comp(out.flat_index(oidx)), mr.comp({a, b}),
                  f.comp(c));
    }
  }
  return out;
}

// out[a, idx-minus-`at`] = f[.. a at `at` ..]
TensorJet lead_rename(const TensorJet& f, int at, int deg) {
  const int n = f.dim();
  std::vector<Var> vars(size_t(f.rank()), Var::Lo);
  TensorJet out(n, deg, vars, 0);
  std::vector<int> fidx(f.rank()), oidx(f.rank());
  for (size_t c = 0; c < f.ncomp(); ++c) {
    size_t tmp = c;
    for (int k = f.rank() - 1; k >= 0; --k) {
      fidx[k] = int(tmp % n);
      tmp /= n;
    }
    oidx[0] = fidx[at];
    int p = 1;
    for (int k = 0; k < f.rank(); ++k)
      if (k != at) oidx[p++] = fidx[k];
    auto src = f.comp(c);
    auto dst = out.comp(out.flat_index(oidx));
    size_t len = std::min(src.size(), dst.size());
    for (size_t k = 0; k < len; ++k) dst[k] += src[k];
  }
  return out;
}

} // namespace

TractorJet tractor_connection(const TractorJet& v, const Scale& s) {
  const CurvatureBundle& cb = s.bundle();
  if (v.degree() < 1) throw degree_error("jet degree exhausted in tractor connection");
  // P enters the slot rewriting and bounds the trustworthy output order;
  // pure densities see only the plain derivative (Gamma for tensor slots)
  int deg = v.degree() - 1;
  if (v.valence() > 0)
    deg = std::min(deg, cb.P.degree());
  else if (v.extra() > 0)
    deg = std::min(deg, cb.gamma.degree());
  TractorJet out(v.dim(), v.valence(), v.weight(), deg, v.extra() + 1);
  TensorJet gt = cb.g.truncated(deg);
  TensorJet pt = cb.P.truncated(deg);
  TensorJet pr = raise_slot(pt, 1, cb.g_inv.truncated(deg)); // P_a{}^b

  for (auto& [word, f] : v.slots) {
    out.accumulate(word, covariant_derivative(f, cb.gamma, deg));
    for (int p = 0; p < v.valence(); ++p) {
      char L = word[p];
      if (L == 'X') {
        std::string nw = word;
        nw[p] = 'Z';
        int at = z_index_position(nw, v.extra(), p);
        out.accumulate(nw, lead_insert_mul(gt, f, at, deg));
      } else if (L == 'Y') {
        std::string nw = word;
        nw[p] = 'Z';
        int at = z_index_position(nw, v.extra(), p);
        out.accumulate(nw, lead_insert_mul(pt, f, at, deg));
      } else { // Z
        int at = z_index_position(word, v.extra(), p);
        std::string nx = word;
        nx[p] = 'X';
        out.accumulate(nx, lead_contract_mul(pr, f, at, deg), -1.0);
        std::string ny = word;
        ny[p] = 'Y';
        out.accumulate(ny, lead_rename(f, at, deg), -1.0);
      }
    }
  }
  return out;
}

TractorJet tractor_box(const TractorJet& v, const Scale& s) {
  const CurvatureBundle& cb = s.bundle();
  if (v.degree() < 2) throw degree_error("tractor box needs jet degree >= 2");
  TractorJet d2 = tractor_connection(tractor_connection(v, s), s);
  const int deg = std::min(d2.degree(), cb.J.degree());
  TractorJet out(v.dim(), v.valence(), v.weight() - 2, deg, v.extra());
  TensorJet ginv_t = cb.g_inv.truncated(deg);
  for (auto& [word, f] : d2.slots) {
    TensorJet raised = raise_slot(f, 0, ginv_t);
    out.accumulate(word, contract_slots(raised, 0, 1));
  }
  Jet jt = cb.J.truncated(deg);
  for (auto& [word, f] : v.slots)
    out.accumulate(word, mul_scalar(f.truncated(deg), jt), double(v.weight()));
  return out;
}

TractorJet tractor_D(const TractorJet& v, const Scale& s) {
  if (v.extra() != 0) throw usage_error("tractor_D expects a pure tractor");
  const CurvatureBundle& cb = s.bundle();
  if (v.degree() < 2) throw degree_error("tractor_D needs jet degree >= 2");
  const int n = cb.dim;
  const int w = v.weight();
  TractorJet dv = tractor_connection(v, s);
  TractorJet bx = tractor_box(v, s);
  const int deg = bx.degree();
  TractorJet out(v.dim(), v.valence() + 1, w - 1, deg, 0);

  const double c1 = double(n + 2 * w - 2);
  // Y slot: (n+2w-2) w V
  for (auto& [word, f] : v.slots)
    out.accumulate("Y" + word, f.truncated(deg), c1 * w);
  // Z slot: (n+2w-2) grad V (the derivative index becomes the owned index)
  for (auto& [word, f] : dv.slots)
    out.accumulate("Z" + word, f.truncated(deg), c1);
  // X slot: -Box V
  for (auto& [word, f] : bx.slots)
    out.accumulate("X" + word, f, -1.0);
  return out;
}

TractorJet w_tractor(const Scale& s) {
  const CurvatureBundle& cb = s.bundle();
  const TensorJet& b = cb.bach_t();
  const TensorJet& a = cb.cotton_t();
  const int n = cb.dim;
  const int deg = b.degree();
  TractorJet w(n, 4, -2, deg);

  TensorJet c = cb.C.truncated(deg);
  w.accumulate("ZZZZ", c, double(n - 4));

  std::array<int, 3> perm_a{1, 2, 0}; // out[a,b,e] = A[e,a,b]
  TensorJet a_eab = permute_slots(a.truncated(deg), perm_a);
  w.accumulate("ZZXZ", a_eab, -double(n - 4));
  w.accumulate("ZZZX", a_eab, +double(n - 4));

  TensorJet a_nat = a.truncated(deg);
  w.accumulate("XZZZ", a_nat, -double(n - 4));
  w.accumulate("ZXZZ", a_nat, +double(n - 4));

  std::array<int, 2> tr{1, 0};
  TensorJet b_t = permute_slots(b, tr); // comp[b,e] = B[e,b]
  w.accumulate("XZXZ", b_t, +1.0);
  w.accumulate("XZZX", b_t, -1.0);
  w.accumulate("ZXXZ", b_t, -1.0);
  w.accumulate("ZXZX", b_t, +1.0);
  return w;
}

// ------------------------------------------------------------------ hash

TractorJet hash_double(const TractorJet& r, const TractorJet& t, const TensorJet& g_inv) {
  if (r.valence() != 4 || r.extra() != 0)
    throw usage_error("hash operator must be a pure valence-4 tractor");
  std::vector<int> act;
  for (int k = 0; k < t.valence(); ++k) act.push_back(k);

  TractorJet res(t.dim(), t.valence(), r.weight() + t.weight(),
                 std::min(r.degree(), t.degree()), t.extra());
  std::array<const TractorJet*, 2> ops{&r, &t};
  TractorNetCache cache;

  auto outs_for = [&](int i, int j) {
    // output slots of T with i -> R.1 and j -> R.3 (j < 0: skip)
    std::vector<TrSlotRef> outs;
    for (int k = 0; k < t.valence(); ++k) {
      if (k == i)
        outs.push_back({0, 1});
      else if (k == j)
        outs.push_back({0, 3});
      else
        outs.push_back({1, k});
    }
    return outs;
  };

  for (int i : act)
    for (int j : act) {
      if (i == j) continue;
      std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{{{0, 0}, {1, i}},
                                                         {{0, 2}, {1, j}}};
      auto outs = outs_for(i, j);
      res += tractor_network(ops, pairs, outs, g_inv, res.degree(), &cache);
    }
  for (int i : act) {
    // both endomorphism factors acting on the same slot: R trace over (0,3)
    std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{{{0, 0}, {0, 3}},
                                                       {{0, 2}, {1, i}}};
    std::vector<TrSlotRef> outs;
    for (int k = 0; k < t.valence(); ++k)
      outs.push_back(k == i ? TrSlotRef{0, 1} : TrSlotRef{1, k});
    res += tractor_network(ops, pairs, outs, g_inv, res.degree(), &cache);
  }
  return res;
}

TractorJet hash_double_rider(const TractorJet& da, const TractorJet& db,
                             const TensorJet& g_inv) {
  if (da.valence() != 5 || db.valence() != 5)
    throw usage_error("hash_double_rider expects valence-5 operands (slot 0 = rider)");
  TractorJet res(db.dim(), 4, da.weight() + db.weight(),
                 std::min(da.degree(), db.degree()), db.extra());
  std::array<const TractorJet*, 2> ops{&da, &db};
  TractorNetCache cache;
  // i, j range over db slots 1..4; hash pairs of da are (1,2) and (3,4)
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) {
      if (i == j) continue;
      std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{
          {{0, 0}, {1, 0}}, {{0, 1}, {1, i}}, {{0, 3}, {1, j}}};
      std::vector<TrSlotRef> outs;
      for (int k = 1; k <= 4; ++k) {
        if (k == i)
          outs.push_back({0, 2});
        else if (k == j)
          outs.push_back({0, 4});
        else
          outs.push_back({1, k});
      }
      res += tractor_network(ops, pairs, outs, g_inv, res.degree(), &cache);
    }
  for (int i = 1; i <= 4; ++i) {
    std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{
        {{0, 0}, {1, 0}}, {{0, 1}, {0, 4}}, {{0, 3}, {1, i}}};
    std::vector<TrSlotRef> outs;
    for (int k = 1; k <= 4; ++k)
      outs.push_back(k == i ? TrSlotRef{0, 2} : TrSlotRef{1, k});
    res += tractor_network(ops, pairs, outs, g_inv, res.degree(), &cache);
  }
  return res;
}

TractorJet box1_alpha(const TractorJet& t, double alpha, const Scale& s,
                      const TractorJet* w_opt) {
  const CurvatureBundle& cb = s.bundle();
  const int n = cb.dim;
  if (n == 4) throw usage_error("box1_alpha is not defined in dimension 4");
  if (2 * t.weight() != 2 - n)
    throw usage_error("box1_alpha expects weight 1 - n/2");
  TractorJet res = tractor_box(t, s);
  TractorJet w = w_opt ? *w_opt : w_tractor(s);
  TractorJet hh = hash_double(w.truncated(res.degree()), t.truncated(res.degree()),
                              cb.g_inv);
  hh *= alpha / double(n - 4);
  res += hh;
  return res;
}

TractorJet box2_dim8(const TractorJet& t, const Scale& s, const TractorJet* w_opt) {
  const CurvatureBundle& cb = s.bundle();
  const int n = cb.dim;
  if (n != 8) throw usage_error("box2_dim8 requires dimension 8");
  if (t.valence() != 4 || t.weight() != -2)
    throw usage_error("box2_dim8 expects a valence-4 weight -2 tractor");
  if (t.degree() < 4) throw degree_error("box2_dim8 needs jet degree >= 4");
  const TensorJet& ginv = cb.g_inv;
  TractorJet w = w_opt ? *w_opt : w_tractor(s);

  const int outdeg = t.degree() - 4;
  TractorJet res(t.dim(), 4, -6, outdeg, 0);

  // only the Box D term consumes jet degree; every other term is algebraic
  // in already-computed tractors, so truncate the operands up front
  TractorJet wt0 = w.truncated(outdeg);
  TractorJet t0 = t.truncated(outdeg);

  // -Y^A Box D_A T
  TractorJet dt = tractor_D(t, s);
  {
    TractorJet bdt = tractor_box(dt, s);
    res += contract_y(bdt, 0) * (-1.0);
  }
  TractorJet dt0 = dt.truncated(outdeg);

  // -1/2 Y^A W_A{}^P{}_B{}^Q D_P T_{Q...}, four placements
  {
    TractorJet w1 = contract_y(wt0, 0); // slots (P, B, Q)
    std::array<const TractorJet*, 2> ops{&w1, &dt0};
    for (int j = 0; j < 4; ++j) {
      std::vector<std::pair<TrSlotRef, TrSlotRef>> pairs{{{0, 0}, {1, 0}},
                                                         {{0, 2}, {1, j + 1}}};
      std::vector<TrSlotRef> outs;
      for (int k = 0; k < 4; ++k)
        outs.push_back(k == j ? TrSlotRef{0, 1} : TrSlotRef{1, k + 1});
      TractorJet term = tractor_network(ops, pairs, outs, ginv, outdeg);
      term *= -0.5;
      res += term;
    }
  }

  // -1/64 Y^A W## X_A W## T
  {
    TractorJet u1 = hash_double(wt0, t0, ginv);
    TractorJet u2 = prepend_x(u1);
    TractorJet u3 = hash_double(wt0, u2, ginv);
    TractorJet term = contract_y(u3, 0);
    term *= -1.0 / 64.0;
    res += term;
  }

  // +1/64 (W##W)##T
  {
    TractorJet ww = hash_double(wt0, wt0, ginv);
    TractorJet term = hash_double(ww, t0, ginv);
    term *= 1.0 / 64.0;
    res += term;
  }

  // +1/16 (D_I W)## D^I T
  {
    TractorJet dw = tractor_D(w, s).truncated(outdeg);
    TractorJet term = hash_double_rider(dw, dt0, ginv);
    term *= 1.0 / 16.0;
    res += term;
  }

  // +1/32 W##W##T
  {
    TractorJet wt = hash_double(wt0, t0, ginv);
    TractorJet term = hash_double(wt0, wt, ginv);
    term *= 1.0 / 32.0;
    res += term;
  }
  return res;
}

TractorJet di_splitting(const TensorJet& u, const Scale& s) {
  const CurvatureBundle& cb = s.bundle();
  const int n = cb.dim;
  if (u.rank() != 4) throw usage_error("di_splitting expects a (0,4) tensor");
  {
    double res = 0.0;
    // quick symmetry sanity: double skew and pair swap
    res = std::max(res, skew_residual(u, 0, 1));
    res = std::max(res, skew_residual(u, 2, 3));
    if (res > 1e-6 * std::max(1.0, u.max_abs()))
      throw usage_error("di_splitting input lacks Weyl symmetries");
  }
  if (u.degree() < 2) throw degree_error("di_splitting needs jet degree >= 2");
  const int deg = u.degree() - 2;
  TractorJet out(n, 4, -2, deg);

  TensorJet ut = u.truncated(deg);
  out.accumulate("ZZZZ", ut, double((n - 4) * (n - 3)));

  // v_{xyz} = grad^s u_{sxyz}
  TensorJet v = divergence_slot(u, 0, cb.gamma, cb.g_inv);
  std::array<int, 3> perm{1, 2, 0}; // out[b,c,f] = v[f,b,c]
  TensorJet v_fbc = permute_slots(v.truncated(deg), perm);
  out.accumulate("ZZXZ", v_fbc, -double(n - 4));
  out.accumulate("ZZZX", v_fbc, +double(n - 4));
  TensorJet v_nat = v.truncated(deg);
  out.accumulate("XZZZ", v_nat, -double(n - 4));
  out.accumulate("ZXZZ", v_nat, +double(n - 4));

  // S_{cf} = grad^{(b} grad^{e)} u_{bcef} + (n-3) P^{be} u_{bcef}
  TensorJet d2 = covariant_derivative(covariant_derivative(u, cb.gamma), cb.gamma);
  TensorJet ginv = cb.g_inv.truncated(d2.degree());
  TensorJet d2r = raise_slot(raise_slot(d2, 0, ginv), 1, ginv);
  TensorJet pr = raise_slot(raise_slot(cb.P.truncated(deg), 0, cb.g_inv.truncated(deg)),
                            1, cb.g_inv.truncated(deg));
  TensorJet sterm(n, deg, {Var::Lo, Var::Lo}, 0);
  TensorJet ut2 = u.truncated(deg);
  for (int c = 0; c < n; ++c)
    for (int f = 0; f < n; ++f) {
      auto dst = sterm.comp({c, f});
      for (int b = 0; b < n; ++b)
        for (int e = 0; e < n; ++e) {
          auto s1 = d2r.comp({b, e, b, c, e, f});
          auto s2 = d2r.comp({e, b, b, c, e, f});
          for (size_t k = 0; k < dst.size(); ++k) dst[k] += 0.5 * (s1[k] + s2[k]);
          Jet tmp(sterm.space_ptr());
          jet_mul_acc(sterm.space(), deg, tmp.coeffs(), pr.comp({b, e}),
                      ut2.comp({b, c, e, f}));
          for (size_t k = 0; k < dst.size(); ++k) dst[k] += (n - 3) * tmp.coeffs()[k];
        }
    }
  out.accumulate("XZXZ", sterm, +1.0);
  out.accumulate("XZZX", sterm, -1.0);
  out.accumulate("ZXXZ", sterm, -1.0);
  out.accumulate("ZXZX", sterm, +1.0);
  return out;
}

// --------------------------------------------------------------- rescale

RescaleData make_rescale_data(const ConformalFactor& cf, const CurvatureBundle& base,
                              int degree) {
  const int n = base.dim;
  std::vector<Jet> coords;
  for (int i = 0; i < n; ++i)
    coords.push_back(Jet::coordinate(n, degree + 1, i, base.point[i]));
  Jet om_hi = eval_expr(cf.omega, coords);
  RescaleData rd;
  rd.omega = om_hi.truncated(degree);
  rd.exp_omega = apply_analytic(AnalyticFn::Exp, rd.omega);
  rd.ups = TensorJet(n, degree, {Var::Lo}, 0);
  for (int a = 0; a < n; ++a) {
    Jet p = partial(om_hi, a);
    auto dst = rd.ups.comp(size_t(a));
    std::copy(p.coeffs().begin(), p.coeffs().begin() + long(dst.size()), dst.begin());
  }
  rd.ups_up = raise_slot(rd.ups, 0, base.g_inv.truncated(degree));
  rd.ups2 = Jet(JetSpace::get(n, degree));
  for (int a = 0; a < n; ++a)
    jet_mul_acc(*rd.ups2.space_ptr(), degree, rd.ups2.coeffs(), rd.ups.comp(size_t(a)),
                rd.ups_up.comp(size_t(a)));
  return rd;
}

TractorJet rescale_components(const TractorJet& v, const RescaleData& rd) {
  if (v.extra() != 0) throw usage_error("rescale_components expects a pure tractor");
  const int deg = std::min(v.degree(), rd.omega.degree());
  TractorJet out(v.dim(), v.valence(), v.weight(), deg);
  const int k = v.valence();

  for (auto& [word, f0] : v.slots) {
    TensorJet f = f0.truncated(deg);
    // branch over the substitution of every letter:
    //   X = X'                     Z = Z' - Ups^b X'
    //   Y = Y' + Ups_b Z'^b - (1/2)|Ups|^2 X'
    std::string target(size_t(k), '?');
    struct Op {
      int kind; // 0: Z->X contraction at f-position, 1: Y->Z insertion, 2: Y->X scalar
      int pos;
    };
    std::vector<Op> pending;
    std::function<void(int, double)> walk = [&](int p, double coef) {
      if (p == k) {
        TensorJet t = f;
        double c = coef;
        // contractions first, descending f positions
        std::vector<int> contr;
        int n_ins = 0, n_sc = 0;
        for (auto& op : pending) {
          if (op.kind == 0) contr.push_back(op.pos);
          if (op.kind == 1) ++n_ins;
          if (op.kind == 2) ++n_sc;
        }
        std::sort(contr.rbegin(), contr.rend());
        for (int pos : contr) {
          std::array<const TensorJet*, 2> ops{&t, &rd.ups_up};
          std::vector<std::pair<NetRef, NetRef>> prs{{{0, pos}, {1, 0}}};
          std::vector<NetRef> order;
          for (int q = 0; q < t.rank(); ++q)
            if (q != pos) order.push_back({0, q});
          t = tensor_network(ops, prs, order, 0);
        }
        // insertions, ascending target z-positions
        if (n_ins) {
          std::vector<int> ins;
          for (auto& op : pending)
            if (op.kind == 1) ins.push_back(z_index_position(target, 0, op.pos));
          std::sort(ins.begin(), ins.end());
          for (int at : ins) {
            std::array<const TensorJet*, 2> ops{&t, &rd.ups};
            std::vector<NetRef> order;
            for (int q = 0; q < at; ++q) order.push_back({0, q});
            order.push_back({1, 0});
            for (int q = at; q < t.rank(); ++q) order.push_back({0, q});
            t = tensor_network(ops, {}, order, 0);
          }
        }
        for (int q = 0; q < n_sc; ++q) t = mul_scalar(t, rd.ups2);
        // retrivialize the density: e^{(component weight) omega}
        int cw = out.component_weight(target);
        if (cw != 0) t = mul_scalar(t, jet_pow(rd.exp_omega, double(cw)));
        out.accumulate(target, t.truncated(deg), c);
        return;
      }
      char L = word[p];
      if (L == 'X') {
        target[p] = 'X';
        walk(p + 1, coef);
      } else if (L == 'Z') {
        target[p] = 'Z';
        walk(p + 1, coef);
        target[p] = 'X';
        pending.push_back({0, z_index_position(word, 0, p)});
        walk(p + 1, -coef);
        pending.pop_back();
      } else { // Y
        target[p] = 'Y';
        walk(p + 1, coef);
        target[p] = 'Z';
        pending.push_back({1, p});
        walk(p + 1, coef);
        pending.pop_back();
        target[p] = 'X';
        pending.push_back({2, p});
        walk(p + 1, -0.5 * coef);
        pending.pop_back();
      }
    };
    walk(0, 1.0);
  }
  return out;
}

} // namespace tractoria
