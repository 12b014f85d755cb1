#ifndef TRACTORIA_METRIC_HPP
#define TRACTORIA_METRIC_HPP

#include <map>
#include <string>
#include <vector>

#include "tractoria/expr.hpp"
#include "tractoria/tensor.hpp"

namespace tractoria {

// One metric representative g of a conformal class, given in closed form on
// a single coordinate chart. Entries are row-major expression trees over
// x0..x{n-1}.
struct MetricSpec {
  int dim = 0;
  std::vector<int> signature;        // advisory; empty means all +1
  std::vector<ExprPtr> entries;      // dim*dim, row-major, symmetric
  std::string name;

  const ExprPtr& entry(int i, int j) const { return entries[size_t(i) * dim + j]; }
};

struct ConformalFactor {
  ExprPtr omega;
};

// Parse the metric JSON document:
//   {"dim": n, "signature": [...], "entries": [[expr,...],...], "name": "..."}
MetricSpec parse_metric(const std::string& json_text);

std::string metric_to_json(const MetricSpec& spec);

// Builtin registry: flat, sphere_stereo, conformally_flat, einstein_product,
// poly_perturbation. Parameters are given as strings and converted per
// metric; see list_builtin_metrics() for the accepted keys.
MetricSpec builtin_metric(const std::string& name,
                          const std::map<std::string, std::string>& params);

std::vector<std::string> list_builtin_metrics();

struct LiftedMetric {
  TensorJet g;      // (0,2), weight 0: one representative, not the class
  TensorJet g_inv;  // (2,0), weight 0
};

// Evaluate all entries as jets at `point` and invert by jet Gaussian
// elimination. Throws numeric_error if the metric is singular at the point
// (pivot below 1e-10 of the row scale) or an entry hits a domain error.
LiftedMetric lift_metric(const MetricSpec& spec, std::span<const double> point,
                         int degree);

// e^{2 omega} g as expression trees.
MetricSpec rescale_metric(const MetricSpec& spec, const ConformalFactor& omega);

// Deterministic generator stream used by poly_perturbation; documented so
// that the seeded test metrics are reproducible across implementations.
// splitmix64: state += 0x9E3779B97F4A7C15, then two xor-multiply rounds.
uint64_t splitmix64(uint64_t& state);
double splitmix_unit(uint64_t& state); // uniform in [-1, 1)

} // namespace tractoria

#endif
