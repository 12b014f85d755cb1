#include "tractoria/obstruction.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

namespace tractoria {

double kn_constant(int n) {
  if (n == 4) return -8.0;
  if (n < 6 || n % 2) throw usage_error("K(n) defined for even n >= 4");
  double f = 1.0;
  for (int m = 2; m <= n / 2 - 3; ++m) f *= m;
  double k = (n - 2) * (n - 4) * std::pow(2.0, n - 4) * f * f;
  if ((n / 2 - 3) % 2) k = -k;
  return (n - 4) * k;
}

// ---------------------------------------------------------------------
// term-table evaluator for the Levi-Civita route formulas
//
// A factor string is SYM:base;ders with one letter per index. Lowercase is
// a lowered slot, uppercase a raised one. `ders` lists derivative indices
// innermost first, so "B:ab;cC" is the Bach Laplacian grad^c grad_c B_ab.
// Free letters are a and b; every other letter appears exactly twice in a
// term, once raised and once lowered.

namespace {

enum class Sym : char { Bach = 'B', Cot = 'A', Sch = 'P', Jtr = 'J', Weyl = 'C', Met = 'g' };

struct Factor {
  Sym sym;
  std::string base, ders; // letters, case = variance
};

struct Term {
  double coef;
  std::vector<Factor> factors;
};

int letter_id(char c) {
  switch (std::tolower(c)) {
    case 'a': return 0;
    case 'b': return 1;
    case 'c': return 2;
    case 'd': return 3;
    case 'e': return 4;
    case 'i': return 5;
    case 'j': return 6;
    case 'k': return 7;
  }
  throw usage_error(std::string("bad index letter '") + c + "'");
}

std::vector<Term> parse_terms(std::span<const char* const> lines) {
  std::vector<Term> out;
  for (const char* line : lines) {
    std::istringstream is(line);
    Term t;
    is >> t.coef;
    std::string tok;
    while (is >> tok) {
      Factor f;
      f.sym = Sym(tok[0]);
      size_t colon = tok.find(':');
      if (colon != std::string::npos) {
        size_t semi = tok.find(';');
        if (semi == std::string::npos) {
          f.base = tok.substr(colon + 1);
        } else {
          f.base = tok.substr(colon + 1, semi - colon - 1);
          f.ders = tok.substr(semi + 1);
        }
      }
      t.factors.push_back(std::move(f));
    }
    out.push_back(std::move(t));
  }
  return out;
}

class TermEvaluator {
public:
  TermEvaluator(const CurvatureBundle& cb, int degree) : cb_(cb), deg_(degree) {
    if (degree < 0) throw degree_error("metric jet degree too low for this formula");
  }

  TensorJet evaluate(std::span<const Term> terms, double& scale_out) {
    const int n = cb_.dim;
    TensorJet out(n, deg_, {Var::Lo, Var::Lo}, 0);
    double scale = 1.0;
    for (const Term& t : terms) {
      TensorJet acc = eval_term(t);
      acc *= t.coef;
      scale = std::max(scale, acc.max_abs_value());
      out += acc;
    }
    scale_out = scale;
    return out;
  }

private:
  const CurvatureBundle& cb_;
  int deg_;
  std::map<std::string, TensorJet> cache_;

  const TensorJet& prepared(const Factor& f) {
    std::string key(1, char(f.sym));
    key += '/';
    for (char c : f.base) key += std::isupper(c) ? 'U' : 'l';
    key += '/';
    for (char c : f.ders) key += std::isupper(c) ? 'U' : 'l';
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    const int m = int(f.ders.size());
    TensorJet base = base_tensor(f.sym);
    if (base.degree() < deg_ + m)
      throw degree_error("metric jet degree too low for a derivative in the formula");
    TensorJet t = base.truncated(deg_ + m);
    for (int q = 0; q < m; ++q) t = covariant_derivative(t, cb_.gamma, deg_ + m - q - 1);
    // array order after m derivatives: [der_m ... der_1, base...]
    TensorJet ginv = cb_.g_inv.truncated(deg_);
    for (int q = 1; q <= m; ++q)
      if (std::isupper(f.ders[q - 1])) t = raise_slot(t, m - q, ginv);
    for (size_t p = 0; p < f.base.size(); ++p)
      if (std::isupper(f.base[p])) t = raise_slot(t, m + int(p), ginv);
    return cache_.emplace(key, std::move(t)).first->second;
  }

  TensorJet base_tensor(Sym s) {
    switch (s) {
      case Sym::Bach: return cb_.bach_t();
      case Sym::Cot: return cb_.cotton_t();
      case Sym::Sch: return cb_.P;
      case Sym::Weyl: return cb_.C;
      case Sym::Met: return cb_.g;
      case Sym::Jtr: {
        TensorJet j(cb_.dim, cb_.J.degree(), {}, -2);
        auto dst = j.comp(size_t(0));
        auto src = cb_.J.coeffs();
        std::copy(src.begin(), src.end(), dst.begin());
        return j;
      }
    }
    throw usage_error("unknown tensor symbol");
  }

  TensorJet eval_term(const Term& term) {
    const int n = cb_.dim;
    std::vector<const TensorJet*> ft;
    std::vector<std::vector<int>> letters; // per factor, letter ids in array order
    bool bound[8] = {};
    for (const Factor& f : term.factors) {
      ft.push_back(&prepared(f));
      std::vector<int> ls;
      for (auto q = f.ders.rbegin(); q != f.ders.rend(); ++q) ls.push_back(letter_id(*q));
      for (char c : f.base) ls.push_back(letter_id(c));
      for (int l : ls)
        if (l >= 2) bound[l] = true;
      letters.push_back(std::move(ls));
    }
    std::vector<int> bl;
    for (int l = 2; l < 8; ++l)
      if (bound[l]) bl.push_back(l);

    TensorJet acc(n, deg_, {Var::Lo, Var::Lo}, 0);
    auto space = acc.space_ptr();
    const int nb = int(bl.size());
    std::vector<int> assign(8, 0);
    std::vector<int> idx;
    Jet prod(space), tmp(space);

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        assign[0] = a;
        assign[1] = b;
        auto dst = acc.comp({a, b});
        size_t ncomb = 1;
        for (int k = 0; k < nb; ++k) ncomb *= size_t(n);
        for (size_t comb = 0; comb < ncomb; ++comb) {
          size_t c2 = comb;
          for (int k = nb - 1; k >= 0; --k) {
            assign[bl[k]] = int(c2 % n);
            c2 /= n;
          }
          // product of factors
          bool first = true;
          for (size_t fi = 0; fi < ft.size(); ++fi) {
            idx.clear();
            for (int l : letters[fi]) idx.push_back(assign[l]);
            auto c = ft[fi]->comp(ft[fi]->flat_index(idx));
            if (first) {
              std::fill(prod.coeffs().begin(), prod.coeffs().end(), 0.0);
              std::copy(c.begin(), c.begin() + long(prod.coeffs().size()),
                        prod.coeffs().begin());
              first = false;
            } else {
              std::fill(tmp.coeffs().begin(), tmp.coeffs().end(), 0.0);
              jet_mul_acc(*space, deg_, tmp.coeffs(), prod.coeffs(), c);
              std::swap(prod, tmp);
            }
          }
          for (size_t k = 0; k < dst.size(); ++k) dst[k] += prod.coeffs()[k];
        }
      }
    return acc;
  }
};

// dim-6 obstruction, Levi-Civita form (symmetrized Cotton factors expanded)
const char* const kDim6Terms[] = {
    "+0.0625  B:ab;cC",
    "-0.25    J B:ab",
    "+0.125   B:cd C:aCbD",
    "-0.25    P:cd A:abD;C",
    "-0.25    P:cd A:baD;C",
    "+0.25    A:cad A:CbD",
    "-0.5     A:cad A:DbC",
    "-0.125   A:abc J:;C",
    "-0.125   A:bac J:;C",
    "+0.25    P:cd P:De C:aCbE",
};

// dim-8 obstruction: the 87 displayed terms of the symmetrized tensor S_ab
// with obstruction = (1/384) S_(ab). Bars in the source notation are
// derivative indices, innermost first.
const char* const kDim8Terms[] = {
    "-1    B:ab;cCdD",
    "+10   B:ab;cC J",
    "-28   B:ab;cd P:CD",
    "+24   B:ac;bd P:CD",
    "-4    B:cd;eE C:aCbD",
    "-24   B:ac;d P:bC;D",
    "-24   B:cd;a P:bC;D",
    "+56   B:ac;d P:bD;C",
    "-6    B:ab;c J:;C",
    "+12   B:ac;b J:;C",
    "+24   B:cd;a P:CD;b",
    "-32   B:ac;d P:CD;b",
    "-4    B:cd;e C:aCbD;E",
    "+4    B:ab J:;cC",
    "-16   B:cd P:CD;ab",
    "-40   B:cd P:ab;CD",
    "+56   B:cd P:aC;bD",
    "-8    B:ac B:bC",
    "+3    B:cd B:CD g:ab",
    "-24   B:ab J J",
    "-64   B:ac P:bd P:CD",
    "+76   B:ab P:cd P:CD",
    "+28   B:cd g:ab P:Ce P:DE",
    "+16   B:cd J C:aCbD",
    "+32   B:cd P:ae C:bCDE",
    "-24   B:cd P:Ce C:aDbE",
    "+4    B:cd C:aeCi C:bEDI",
    "-8    B:cd C:aeCi C:bIDE",
    "-8    A:acb J:;dDC",
    "-32   A:acb;de P:CD;E",
    "-16   A:acd;e A:bCD;E",
    "+16   A:cda;e A:CDb;E",
    "-32   A:acb;d J:;CD",
    "+32   A:cad;e P:bE P:CD",
    "-64   A:abc;d P:CD J",
    "-128  A:acd;e P:bD P:CE",
    "-128  A:cad;e P:bD P:CE",
    "-608  A:acb;d P:Ce P:DE",
    "-32   A:cad;b P:Ce P:DE",
    "+32   A:acd;e P:Ei C:bCDI",
    "+32   A:cad;e P:Ei C:bCDI",
    "+32   A:acd;e P:Di C:bCEI",
    "+32   A:cad;e P:Di C:bCEI",
    "-64   A:abc;d P:ei C:CEDI",
    "+32   P:cd P:ei C:aCbE;DI",
    "+32   P:cd J:;e C:aCbE;D",
    "+32   A:cde P:Di C:aCbE;I",
    "+32   A:cde P:Di C:aCbI;E",
    "+64   A:acd P:ei C:bCDE;I",
    "+64   A:cad P:ei C:bCDE;I",
    "+8    J:;c J:;d C:aCbD",
    "-16   P:cd;e P:Ci;E C:aDbI",
    "+32   A:cad J:;e C:bCDE",
    "-32   A:cad J:;e C:bECD",
    "-16   A:cde A:CDi C:aIbE",
    "+32   A:cde A:DCi C:aIbE",
    "-32   A:acd A:eDi C:bECI",
    "-32   A:cad A:Dei C:bECI",
    "-32   A:cad A:eiC C:bIDE",
    "+64   A:cad A:ebi C:CDEI",
    "-32   A:cad A:ebi C:CEDI",
    "-64   A:acd P:bD J:;C",
    "-64   A:cad P:bD J:;C",
    "-32   A:abc J J:;C",
    "-16   A:cda P:CD J:;b",
    "-224  A:acb P:Cd J:;D",
    "-96   A:cad A:eCD P:bE",
    "-192  A:cad A:CDe P:bE",
    "-224  A:acb P:de P:CD;E",
    "-96   A:abc A:dCe P:DE",
    "-320  A:cad A:ebD P:CE",
    "+736  A:cad A:Dbe P:CE",
    "-96   A:acd P:bD;e P:CE",
    "-96   A:cad P:bD;e P:CE",
    "-192  A:cad A:Cbe P:DE",
    "+16   P:cd P:Ce C:aiDj C:bIEJ",
    "-32   P:cd P:Ce C:aiDj C:bJEI",
    "-32   P:cd P:ei C:ajbC C:DEIJ",
    "+4    g:ab P:cd P:ei C:CjEk C:DIJK",
    "-4    g:ab P:cd P:ei C:CEjk C:DJIK",
    "-32   P:cd P:ei P:EI C:aCbD",
    "+32   P:cd P:Ce J C:aDbE",
    "-224  P:cd P:ei P:CE C:aDbI",
    "+150  g:ab P:cd P:ei P:Ej C:CIDJ",
    "+150  g:ab P:cd P:ei P:Cj C:DEIJ",
    "-32   P:ac P:de P:Ci C:bDEI",
    "-64   P:ac P:de P:Di C:bECI",
};

const std::vector<Term>& dim6_terms() {
  static const std::vector<Term> t = parse_terms(kDim6Terms);
  return t;
}
const std::vector<Term>& dim8_terms() {
  static const std::vector<Term> t = parse_terms(kDim8Terms);
  return t;
}

void basic_residuals(ObstructionResult& r, const CurvatureBundle& cb) {
  r.symmetry_residual = sym_residual(r.B, 0, 1) / 2.0;
  TensorJet raised = raise_slot(r.B, 0, cb.g_inv.truncated(r.B.degree()));
  r.trace_residual = contract_slots(raised, 0, 1).max_abs();
  if (r.B.degree() >= 1)
    r.divergence_residual = obstruction_divergence(r.B, cb).max_abs();
}

} // namespace

ObstructionResult obstruction4(const CurvatureBundle& cb) {
  if (cb.dim != 4) throw usage_error("obstruction4 requires dimension 4");
  ObstructionResult r;
  r.dim = 4;
  r.route = "direct";
  r.B = cb.bach_t() * (-0.5);
  r.B.set_weight(-2);
  r.scale = std::max(1.0, cb.bach_t().max_abs_value());
  basic_residuals(r, cb);
  return r;
}

ObstructionResult obstruction6_direct(const CurvatureBundle& cb) {
  if (cb.dim != 6) throw usage_error("obstruction6_direct requires dimension 6");
  if (cb.degree < 6) throw degree_error("obstruction6_direct needs metric degree >= 6");
  ObstructionResult r;
  r.dim = 6;
  r.route = "direct";
  TermEvaluator ev(cb, cb.degree - 6);
  r.B = ev.evaluate(dim6_terms(), r.scale);
  r.B.set_weight(-4);
  basic_residuals(r, cb);
  return r;
}

ObstructionResult obstruction8_direct(const CurvatureBundle& cb) {
  if (cb.dim != 8) throw usage_error("obstruction8_direct requires dimension 8");
  if (cb.degree < 8) throw degree_error("obstruction8_direct needs metric degree >= 8");
  ObstructionResult r;
  r.dim = 8;
  r.route = "direct";
  TermEvaluator ev(cb, cb.degree - 8);
  TensorJet s = ev.evaluate(dim8_terms(), r.scale);
  std::array<int, 2> both{0, 1};
  r.B = symmetrize(s, both);
  r.B *= 1.0 / 384.0;
  r.B.set_weight(-6);
  r.scale = std::max(1.0, r.scale / 384.0);
  basic_residuals(r, cb);
  return r;
}

namespace {

ObstructionResult tractor_route(const CurvatureBundle& cb, int n) {
  Scale sc{&cb};
  TractorJet w = w_tractor(sc);
  TractorJet bw = (n == 6) ? box1_alpha(w, 0.5, sc, &w) : box2_dim8(w, sc, &w);
  const double kn = kn_constant(n);

  ObstructionResult r;
  r.dim = n;
  r.route = "tractor";
  r.B = bw.word_component("XZXZ") * (4.0 / kn);
  r.B.set_weight(2 - n);

  TractorJet expect(n, 4, bw.weight(), bw.degree());
  expect.accumulate("XZXZ", r.B, kn / 4.0);
  expect.accumulate("XZZX", r.B, -kn / 4.0);
  expect.accumulate("ZXXZ", r.B, -kn / 4.0);
  expect.accumulate("ZXZX", r.B, kn / 4.0);
  TractorJet resid = bw - expect;
  r.upper_slot_residual = resid.max_abs();
  r.scale = std::max({1.0, w.max_abs(), bw.max_abs()});
  basic_residuals(r, cb);
  return r;
}

} // namespace

ObstructionResult obstruction6_tractor(const CurvatureBundle& cb) {
  if (cb.dim != 6) throw usage_error("obstruction6_tractor requires dimension 6");
  if (cb.degree < 6) throw degree_error("obstruction6_tractor needs metric degree >= 6");
  return tractor_route(cb, 6);
}

ObstructionResult obstruction8_tractor(const CurvatureBundle& cb) {
  if (cb.dim != 8) throw usage_error("obstruction8_tractor requires dimension 8");
  if (cb.degree < 8) throw degree_error("obstruction8_tractor needs metric degree >= 8");
  return tractor_route(cb, 8);
}

ObstructionResult obstruction_direct(const CurvatureBundle& cb) {
  switch (cb.dim) {
    case 4: return obstruction4(cb);
    case 6: return obstruction6_direct(cb);
    case 8: return obstruction8_direct(cb);
  }
  throw usage_error("obstruction implemented for dimensions 4, 6, 8");
}

ObstructionResult obstruction_tractor(const CurvatureBundle& cb) {
  switch (cb.dim) {
    case 4: return obstruction4(cb); // -1/2 Bach, shared with the direct route
    case 6: return obstruction6_tractor(cb);
    case 8: return obstruction8_tractor(cb);
  }
  throw usage_error("obstruction implemented for dimensions 4, 6, 8");
}

TensorJet obstruction_divergence(const TensorJet& b, const CurvatureBundle& cb) {
  return divergence_slot(b, 0, cb.gamma, cb.g_inv);
}

TensorJet dim6_leading_term(const CurvatureBundle& cb, int jet_degree) {
  if (cb.dim != 6) throw usage_error("dim6_leading_term requires dimension 6");
  // (1/16) Delta grad^c grad^d C_{cadb}, divided by n-3 = 3 because the
  // contracted Bianchi identity folds div C into the Cotton tensor before
  // the Bach divergence is taken
  static const char* const kLead[] = {"+1 C:cadb;DCeE"};
  TermEvaluator ev(cb, jet_degree);
  double scale = 0;
  static const std::vector<Term> t = parse_terms(kLead);
  TensorJet out = ev.evaluate(t, scale);
  out *= 1.0 / 48.0;
  out.set_weight(-4);
  return out;
}

} // namespace tractoria
