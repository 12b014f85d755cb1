#include "tractoria/metric.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace tractoria {

using json = nlohmann::json;

MetricSpec parse_metric(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw usage_error(std::string("metric JSON: ") + e.what());
  }
  MetricSpec spec;
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("entries"))
    throw usage_error("metric JSON must be an object with 'dim' and 'entries'");
  spec.dim = doc["dim"].get<int>();
  if (spec.dim < 3) throw usage_error("metric dimension must be at least 3");
  if (doc.contains("name")) spec.name = doc["name"].get<std::string>();
  if (doc.contains("signature")) {
    spec.signature = doc["signature"].get<std::vector<int>>();
    if (int(spec.signature.size()) != spec.dim)
      throw usage_error("signature length must equal dim");
    for (int s : spec.signature)
      if (s != 1 && s != -1) throw usage_error("signature entries must be +1 or -1");
  }
  const auto& rows = doc["entries"];
  if (!rows.is_array() || int(rows.size()) != spec.dim)
    throw usage_error("entries must be a dim x dim array of expression strings");
  spec.entries.resize(size_t(spec.dim) * spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    if (!rows[i].is_array() || int(rows[i].size()) != spec.dim)
      throw usage_error("entries row " + std::to_string(i) + " has wrong length");
    for (int j = 0; j < spec.dim; ++j) {
      std::string text = rows[i][j].get<std::string>();
      ExprPtr e;
      try {
        e = parse_expr(text);
      } catch (const parse_error& pe) {
        throw usage_error("entry (" + std::to_string(i) + "," + std::to_string(j) +
                          "): " + pe.what());
      }
      int mc = max_coord(e);
      if (mc >= spec.dim)
        throw usage_error("entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") uses coordinate x" + std::to_string(mc) +
                          " beyond chart dimension");
      spec.entries[size_t(i) * spec.dim + j] = e;
    }
  }
  for (int i = 0; i < spec.dim; ++i)
    for (int j = i + 1; j < spec.dim; ++j)
      if (!expr_equal(spec.entry(i, j), spec.entry(j, i)))
        throw usage_error("entries (" + std::to_string(i) + "," + std::to_string(j) +
                          ") and (" + std::to_string(j) + "," + std::to_string(i) +
                          ") are not symmetric");
  return spec;
}

std::string metric_to_json(const MetricSpec& spec) {
  json doc;
  doc["dim"] = spec.dim;
  if (!spec.signature.empty()) doc["signature"] = spec.signature;
  if (!spec.name.empty()) doc["name"] = spec.name;
  json rows = json::array();
  for (int i = 0; i < spec.dim; ++i) {
    json row = json::array();
    for (int j = 0; j < spec.dim; ++j) row.push_back(print_expr(spec.entry(i, j)));
    rows.push_back(row);
  }
  doc["entries"] = rows;
  return doc.dump(2);
}

uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double splitmix_unit(uint64_t& state) {
  return double(splitmix64(state) >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

namespace {

int param_int(const std::map<std::string, std::string>& p, const std::string& k,
              int fallback, bool required = false) {
  auto it = p.find(k);
  if (it == p.end()) {
    if (required) throw usage_error("missing metric parameter '" + k + "'");
    return fallback;
  }
  return std::atoi(it->second.c_str());
}

double param_double(const std::map<std::string, std::string>& p, const std::string& k,
                    double fallback, bool required = false) {
  auto it = p.find(k);
  if (it == p.end()) {
    if (required) throw usage_error("missing metric parameter '" + k + "'");
    return fallback;
  }
  return std::strtod(it->second.c_str(), nullptr);
}

MetricSpec identity_spec(int n) {
  MetricSpec s;
  s.dim = n;
  s.entries.assign(size_t(n) * n, expr_constant(0.0));
  for (int i = 0; i < n; ++i) s.entries[size_t(i) * n + i] = expr_constant(1.0);
  return s;
}

// 4 r^4 / (r^2 + |x|^2)^2 on the listed coordinates: round sphere of radius
// r in a stereographic chart, sectional curvature 1/r^2.
ExprPtr stereo_factor(double r, int coord_begin, int coord_end) {
  ExprPtr s = expr_constant(r * r);
  for (int k = coord_begin; k < coord_end; ++k)
    s = expr_add(s, expr_mul(expr_coord(k), expr_coord(k)));
  return expr_div(expr_constant(4.0 * r * r * r * r), expr_pow(s, 2.0));
}

MetricSpec sphere_stereo(int n, double r) {
  MetricSpec s = identity_spec(n);
  ExprPtr f = stereo_factor(r, 0, n);
  for (int i = 0; i < n; ++i) s.entries[size_t(i) * n + i] = f;
  return s;
}

MetricSpec poly_perturbation(int n, uint64_t seed, double eps, int deg,
                             int terms, int nz_entries) {
  if (n < 3) throw usage_error("poly_perturbation needs n >= 3");
  if (deg < 0) throw usage_error("poly_perturbation needs deg >= 0");
  MetricSpec s = identity_spec(n);
  s.name = "poly_perturbation";
  uint64_t st = seed;

  // monomial list |alpha| <= deg in the jet enumeration order
  auto space = JetSpace::get(n, deg);
  int nmono = space->size();

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) pairs.push_back({i, j});
  if (nz_entries > 0 && nz_entries < int(pairs.size())) {
    // draw without replacement, in stream order
    std::vector<std::pair<int, int>> chosen;
    std::vector<std::pair<int, int>> pool = pairs;
    for (int k = 0; k < nz_entries; ++k) {
      size_t pick = size_t(splitmix64(st) % pool.size());
      chosen.push_back(pool[pick]);
      pool.erase(pool.begin() + pick);
    }
    pairs = chosen;
  }

  for (auto [i, j] : pairs) {
    ExprPtr h;
    auto add_term = [&](int mono, double coef) {
      auto e = space->exponent(mono);
      ExprPtr t = expr_constant(coef);
      for (int c = 0; c < n; ++c)
        for (int rep = 0; rep < e[c]; ++rep) t = expr_mul(t, expr_coord(c));
      h = h ? expr_add(h, t) : t;
    };
    if (terms > 0 && terms < nmono) {
      std::vector<int> idx;
      for (int k = 0; k < terms; ++k) {
        int pick;
        do {
          pick = int(splitmix64(st) % uint64_t(nmono));
        } while (std::find(idx.begin(), idx.end(), pick) != idx.end());
        idx.push_back(pick);
        add_term(pick, eps * splitmix_unit(st));
      }
    } else {
      for (int mono = 0; mono < nmono; ++mono) add_term(mono, eps * splitmix_unit(st));
    }
    ExprPtr entry = (i == j) ? expr_add(expr_constant(1.0), h) : h;
    s.entries[size_t(i) * n + j] = entry;
    s.entries[size_t(j) * n + i] = entry;
  }
  return s;
}

} // namespace

MetricSpec builtin_metric(const std::string& name,
                          const std::map<std::string, std::string>& params) {
  if (name == "flat") {
    int n = param_int(params, "n", 0, true);
    if (n < 3) throw usage_error("flat: n must be >= 3");
    MetricSpec s = identity_spec(n);
    s.name = "flat";
    return s;
  }
  if (name == "sphere_stereo") {
    int n = param_int(params, "n", 0, true);
    double r = param_double(params, "r", 1.0);
    if (n < 2 || r <= 0) throw usage_error("sphere_stereo: need n >= 2 and r > 0");
    MetricSpec s = sphere_stereo(n, r);
    s.name = "sphere_stereo";
    return s;
  }
  if (name == "conformally_flat") {
    int n = param_int(params, "n", 0, true);
    auto it = params.find("omega");
    if (it == params.end()) throw usage_error("conformally_flat: missing omega");
    ExprPtr omega = parse_expr(it->second);
    if (max_coord(omega) >= n)
      throw usage_error("conformally_flat: omega uses coordinates beyond n");
    MetricSpec s = identity_spec(n);
    ExprPtr f = expr_call(CallFn::Exp, expr_mul(expr_constant(2.0), omega));
    for (int i = 0; i < n; ++i) s.entries[size_t(i) * n + i] = f;
    s.name = "conformally_flat";
    return s;
  }
  if (name == "einstein_product") {
    int p = param_int(params, "p", 0, true);
    int q = param_int(params, "q", 0, true);
    if (p < 2 || q < 2)
      throw usage_error("einstein_product: need p, q >= 2 (p = 1 has no Einstein pairing)");
    int n = p + q;
    double r2 = double(q - 1) / double(p - 1); // matches the two Ricci blocks
    MetricSpec s = identity_spec(n);
    ExprPtr f1 = stereo_factor(1.0, 0, p);
    ExprPtr f2 = stereo_factor(std::sqrt(r2), p, n);
    for (int i = 0; i < p; ++i) s.entries[size_t(i) * n + i] = f1;
    for (int i = p; i < n; ++i) s.entries[size_t(i) * n + i] = f2;
    s.name = "einstein_product";
    return s;
  }
  if (name == "poly_perturbation") {
    int n = param_int(params, "n", 0, true);
    int seed = param_int(params, "seed", 1);
    double eps = param_double(params, "eps", 0.05);
    int deg = param_int(params, "deg", 3);
    int terms = param_int(params, "terms", 0);
    int entries = param_int(params, "entries", 0);
    return poly_perturbation(n, uint64_t(seed), eps, deg, terms, entries);
  }
  throw usage_error("unknown builtin metric '" + name + "'");
}

std::vector<std::string> list_builtin_metrics() {
  return {
      "flat?n=<dim>",
      "sphere_stereo?n=<dim>,r=<radius>",
      "conformally_flat?n=<dim>,omega=<expr>",
      "einstein_product?p=<dim1>,q=<dim2>",
      "poly_perturbation?n=<dim>,seed=<s>,eps=<e>,deg=<d>[,terms=<t>,entries=<k>]",
  };
}

LiftedMetric lift_metric(const MetricSpec& spec, std::span<const double> point,
                         int degree) {
  const int n = spec.dim;
  if (int(point.size()) != n) throw usage_error("point length must equal metric dim");
  if (degree < 0) throw usage_error("negative jet degree");

  std::vector<Jet> coords;
  coords.reserve(n);
  for (int i = 0; i < n; ++i) coords.push_back(Jet::coordinate(n, degree, i, point[i]));

  LiftedMetric out{TensorJet(n, degree, {Var::Lo, Var::Lo}, 0),
                   TensorJet(n, degree, {Var::Up, Var::Up}, 0)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet e = eval_expr(spec.entry(i, j), coords);
      auto dst = out.g.comp({i, j});
      std::copy(e.coeffs().begin(), e.coeffs().end(), dst.begin());
    }

  // jet Gauss-Jordan for the inverse
  std::vector<std::vector<Jet>> a(n), inv(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i].push_back(out.g.component_jet(std::array<int, 2>{i, j}));
      inv[i].push_back(Jet(a[i][j].space_ptr(), i == j ? 1.0 : 0.0));
    }
  }
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 0.0;
    for (int r = col; r < n; ++r) {
      double v = std::fabs(a[r][col].value());
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    double row_scale = 0.0;
    for (int r = col; r < n; ++r)
      for (int c = 0; c < n; ++c) row_scale = std::max(row_scale, std::fabs(a[r][c].value()));
    if (piv < 0 || best < 1e-10 * std::max(1.0, row_scale))
      throw numeric_error("metric is singular at the requested point");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Jet r = jet_pow(a[col][col], -1.0);
    for (int c = 0; c < n; ++c) {
      a[col][c] = a[col][c] * r;
      inv[col][c] = inv[col][c] * r;
    }
    for (int rr = 0; rr < n; ++rr) {
      if (rr == col) continue;
      Jet f = a[rr][col];
      if (f.max_abs() == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a[rr][c] -= f * a[col][c];
        inv[rr][c] -= f * inv[col][c];
      }
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto dst = out.g_inv.comp({i, j});
      std::copy(inv[i][j].coeffs().begin(), inv[i][j].coeffs().end(), dst.begin());
    }
  out.g.hints.push_back({SymKind::Symmetric, 0, 1});
  out.g_inv.hints.push_back({SymKind::Symmetric, 0, 1});
  return out;
}

MetricSpec rescale_metric(const MetricSpec& spec, const ConformalFactor& omega) {
  if (max_coord(omega.omega) >= spec.dim)
    throw usage_error("conformal factor uses coordinates beyond chart dimension");
  MetricSpec out = spec;
  ExprPtr f = expr_call(CallFn::Exp, expr_mul(expr_constant(2.0), omega.omega));
  for (auto& e : out.entries) e = expr_mul(f, e);
  if (!out.name.empty()) out.name += "_rescaled";
  return out;
}

} // namespace tractoria
