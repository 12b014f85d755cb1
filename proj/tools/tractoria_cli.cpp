// tractoria: conformal curvature quantities from closed-form metrics.
//
// Subcommands:
//   compute       one tensor at one point, JSON on stdout
//   verify        the identity battery (suites: fast, dim8, full)
//   list-metrics  builtin metric registry
//
// Exit codes: 0 ok, 1 verification failure, 2 usage/parse error,
// 3 numerical failure.

#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "tractoria/obstruction.hpp"
#include "tractoria/verify.hpp"

using json = nlohmann::json;
using namespace tractoria;

namespace {

struct Args {
  std::string command;
  std::string tensor;
  std::string metric;
  std::string point;
  std::string degree = "auto";
  std::string format = "json";
  std::string suite = "fast";
  bool diagnostics = true;
  uint64_t seed = 1;
  double time_budget = 600.0;
};

[[noreturn]] void usage_fail(const std::string& msg) {
  std::cerr << "error: " << msg << "\n"
            << "usage:\n"
            << "  tractoria compute --tensor <name> --metric builtin:<name>?k=v,..."
               "|file:<path> --point c0,c1,... [--degree <int>|auto]"
               " [--diagnostics on|off] [--format json] [--time-budget <sec>]\n"
            << "  tractoria verify [--suite fast|dim8|full] [--seed <n>]"
               " [--time-budget <sec>]\n"
            << "  tractoria list-metrics\n";
  std::exit(2);
}

Args parse_args(int argc, char** argv) {
  Args a;
  if (argc < 2) usage_fail("missing command");
  a.command = argv[1];
  for (int i = 2; i < argc; ++i) {
    std::string flag = argv[i];
    auto need = [&](const char* name) -> std::string {
      if (i + 1 >= argc) usage_fail(std::string("missing value for ") + name);
      return argv[++i];
    };
    if (flag == "--tensor") a.tensor = need("--tensor");
    else if (flag == "--metric") a.metric = need("--metric");
    else if (flag == "--point") a.point = need("--point");
    else if (flag == "--degree") a.degree = need("--degree");
    else if (flag == "--format") a.format = need("--format");
    else if (flag == "--suite") a.suite = need("--suite");
    else if (flag == "--seed") a.seed = std::strtoull(need("--seed").c_str(), nullptr, 10);
    else if (flag == "--time-budget")
      a.time_budget = std::strtod(need("--time-budget").c_str(), nullptr);
    else if (flag == "--diagnostics") a.diagnostics = need("--diagnostics") == "on";
    else usage_fail("unknown flag " + flag);
  }
  if (a.format != "json") usage_fail("only --format json is supported");
  return a;
}

MetricSpec resolve_metric(const std::string& arg) {
  if (arg.rfind("builtin:", 0) == 0) {
    std::string rest = arg.substr(8);
    std::string name = rest;
    std::map<std::string, std::string> params;
    size_t q = rest.find('?');
    if (q != std::string::npos) {
      name = rest.substr(0, q);
      std::string plist = rest.substr(q + 1);
      // split on commas, re-joining pieces that carry no '=' (so expression
      // values such as omega=pow(x0,2) survive)
      std::vector<std::string> parts;
      std::stringstream ss(plist);
      std::string piece;
      while (std::getline(ss, piece, ',')) {
        if (!parts.empty() && piece.find('=') == std::string::npos)
          parts.back() += "," + piece;
        else
          parts.push_back(piece);
      }
      for (auto& kv : parts) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw usage_error("bad metric parameter '" + kv + "'");
        params[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
    }
    return builtin_metric(name, params);
  }
  if (arg.rfind("file:", 0) == 0) {
    std::ifstream in(arg.substr(5));
    if (!in) throw usage_error("cannot open metric file " + arg.substr(5));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_metric(ss.str());
  }
  throw usage_error("metric must be builtin:<name>?... or file:<path>");
}

std::vector<double> parse_point(const std::string& s) {
  std::vector<double> p;
  std::stringstream ss(s);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    char* end = nullptr;
    double v = std::strtod(piece.c_str(), &end);
    if (end == piece.c_str()) throw usage_error("bad point coordinate '" + piece + "'");
    p.push_back(v);
  }
  if (p.empty()) throw usage_error("empty point");
  return p;
}

// derivative order of each named tensor in the metric
int tensor_order(const std::string& name, int dim) {
  if (name == "metric" || name == "metric_inverse") return 0;
  if (name == "christoffel") return 1;
  if (name == "riemann" || name == "ricci" || name == "scalar" ||
      name == "schouten" || name == "weyl")
    return 2;
  if (name == "cotton") return 3;
  if (name == "bach") return 4;
  if (name == "obstruction" || name == "obstruction_tractor") {
    if (dim != 4 && dim != 6 && dim != 8)
      throw usage_error("obstruction is available in dimensions 4, 6, 8");
    return dim;
  }
  throw usage_error("unknown tensor '" + name + "'");
}

json tensor_components(const TensorJet& t) {
  const int n = t.dim();
  std::function<json(int, std::vector<int>&)> rec = [&](int slot,
                                                        std::vector<int>& idx) -> json {
    if (slot == t.rank()) return t.value(idx);
    json arr = json::array();
    for (int i = 0; i < n; ++i) {
      idx.push_back(i);
      arr.push_back(rec(slot + 1, idx));
      idx.pop_back();
    }
    return arr;
  };
  std::vector<int> idx;
  return rec(0, idx);
}

json scalar_component(const Jet& j) { return j.value(); }

// refuse configurations whose estimated jet cost exceeds the time budget;
// the estimate is the truncated-product pair count times a pipeline factor
void check_budget(int dim, int degree, double budget_sec) {
  double pairs = 1.0;
  {
    // C(degree + 2 dim, 2 dim) monomial pairs, computed in doubles
    double num = 1.0, den = 1.0;
    for (int k = 1; k <= 2 * dim; ++k) {
      num *= degree + k;
      den *= k;
    }
    pairs = num / den;
  }
  double ops = pairs * std::pow(double(dim), 5) * 4.0;
  double est_seconds = ops / 2e9;
  if (est_seconds > budget_sec)
    throw usage_error("estimated cost " + std::to_string(est_seconds) +
                      " s exceeds the time budget (" + std::to_string(budget_sec) +
                      " s); lower the degree or raise --time-budget");
}

int cmd_compute(const Args& a) {
  if (a.tensor.empty() || a.metric.empty() || a.point.empty())
    usage_fail("compute needs --tensor, --metric and --point");
  MetricSpec spec = resolve_metric(a.metric);
  std::vector<double> point = parse_point(a.point);
  if (int(point.size()) != spec.dim)
    throw usage_error("point length " + std::to_string(point.size()) +
                      " does not match metric dimension " + std::to_string(spec.dim));
  int order = tensor_order(a.tensor, spec.dim);
  int degree;
  if (a.degree == "auto") {
    degree = order;
    if (a.diagnostics && (a.tensor == "obstruction" || a.tensor == "bach" ||
                          a.tensor == "obstruction_tractor"))
      degree += 1; // room for the divergence diagnostic
  } else {
    degree = std::atoi(a.degree.c_str());
    if (degree < order)
      throw usage_error("tensor '" + a.tensor + "' needs degree >= " +
                        std::to_string(order));
  }
  check_budget(spec.dim, degree, a.time_budget);

  json out;
  out["tensor"] = a.tensor;
  out["dim"] = spec.dim;
  out["point"] = point;
  out["degree"] = degree;
  out["index_convention"] = "all indices lowered, row-major nesting";
  json diag;

  if (a.tensor == "metric" || a.tensor == "metric_inverse") {
    auto lift = lift_metric(spec, point, degree);
    const TensorJet& t = (a.tensor == "metric") ? lift.g : lift.g_inv;
    out["weight"] = (a.tensor == "metric") ? 2 : -2;
    out["components"] = tensor_components(t);
  } else {
    auto cb = curvature_bundle(spec, point, degree);
    const char* name = a.tensor.c_str();
    auto put = [&](const TensorJet& t, int weight) {
      out["weight"] = weight;
      out["components"] = tensor_components(t);
    };
    if (!std::strcmp(name, "christoffel")) {
      out["weight"] = 0;
      out["index_convention"] = "first index raised, then two lowered; row-major";
      out["components"] = tensor_components(cb.gamma);
    } else if (!std::strcmp(name, "riemann")) {
      put(cb.riem_low, 2);
    } else if (!std::strcmp(name, "ricci")) {
      put(cb.ricci, 0);
    } else if (!std::strcmp(name, "scalar")) {
      out["weight"] = -2;
      out["components"] = scalar_component(cb.scal);
    } else if (!std::strcmp(name, "schouten")) {
      put(cb.P, 0);
    } else if (!std::strcmp(name, "weyl")) {
      put(cb.C, 2);
      if (a.diagnostics) {
        diag["trace_residual"] =
            trace_residual(cb.C, 0, 2, cb.g_inv.truncated(cb.C.degree()));
        diag["skew_residual"] = skew_residual(cb.C, 0, 1);
      }
    } else if (!std::strcmp(name, "cotton")) {
      put(cb.cotton_t(), 0);
      if (a.diagnostics) diag["skew_residual"] = skew_residual(cb.cotton_t(), 1, 2);
    } else if (!std::strcmp(name, "bach")) {
      put(cb.bach_t(), -2);
      if (a.diagnostics) {
        diag["symmetry_residual"] = sym_residual(cb.bach_t(), 0, 1) / 2;
        diag["trace_residual"] =
            trace_residual(cb.bach_t(), 0, 1, cb.g_inv.truncated(cb.bach_t().degree()));
      }
    } else if (!std::strcmp(name, "obstruction") ||
               !std::strcmp(name, "obstruction_tractor")) {
      ObstructionResult r = std::strcmp(name, "obstruction")
                                ? obstruction_tractor(cb)
                                : obstruction_direct(cb);
      put(r.B, 2 - spec.dim);
      out["route"] = r.route;
      if (a.diagnostics) {
        diag["scale"] = r.scale;
        diag["trace_residual"] = r.trace_residual;
        diag["symmetry_residual"] = r.symmetry_residual;
        if (r.divergence_residual) diag["divergence_residual"] = *r.divergence_residual;
        if (r.upper_slot_residual) diag["upper_slot_residual"] = *r.upper_slot_residual;
      }
    } else {
      throw usage_error("unknown tensor '" + a.tensor + "'");
    }
  }
  if (a.diagnostics) out["diagnostics"] = diag;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Args& a) {
  VerifyReport rep = run_verify(a.suite, a.seed);
  // table
  std::printf("%-34s %-10s %12s %10s  %s\n", "check", "status", "residual",
              "tolerance", "time");
  for (auto& c : rep.checks) {
    std::printf("%-34s %-10s %12.3e %10.1e  %6.2fs\n", c.name.c_str(),
                c.pass ? "pass" : "FAIL", c.residual, c.tolerance, c.seconds);
    if (!c.note.empty()) std::printf("    note: %s\n", c.note.c_str());
  }
  std::printf("%zu checks, %s, %.1fs total\n", rep.checks.size(),
              rep.all_pass() ? "all passed" : "FAILURES", rep.seconds);
  // JSON
  json doc;
  doc["suite"] = rep.suite;
  doc["seed"] = rep.seed;
  doc["pass"] = rep.all_pass();
  doc["seconds"] = rep.seconds;
  json checks = json::array();
  for (auto& c : rep.checks) {
    json jc;
    jc["name"] = c.name;
    jc["identity"] = c.identity;
    jc["criterion"] = c.criterion;
    jc["residual"] = c.residual;
    jc["tolerance"] = c.tolerance;
    jc["pass"] = c.pass;
    jc["seconds"] = c.seconds;
    if (!c.note.empty()) jc["note"] = c.note;
    checks.push_back(jc);
  }
  doc["checks"] = checks;
  std::cout << doc.dump(2) << "\n";
  return rep.all_pass() ? 0 : 1;
}

int cmd_list_metrics() {
  json doc = json::array();
  for (auto& m : list_builtin_metrics()) doc.push_back(m);
  std::cout << doc.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  Args a;
  try {
    a = parse_args(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    if (a.command == "compute") return cmd_compute(a);
    if (a.command == "verify") return cmd_verify(a);
    if (a.command == "list-metrics") return cmd_list_metrics();
    usage_fail("unknown command '" + a.command + "'");
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
