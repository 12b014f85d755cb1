// Acceptance suite: runs the full verification battery and reports one
// line per criterion. Exits nonzero if any criterion fails.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "tractoria/verify.hpp"

using namespace tractoria;

namespace {

const char* criterion_text(int k) {
  switch (k) {
    case 1: return "dim-6 obstruction: direct formula == tractor route (tol 1e-6, < 60 s)";
    case 2: return "dim-8 obstruction: direct formula == tractor route (tol 1e-4, < 600 s)";
    case 3: return "dim-4: Bach routes agree (1e-7); obstruction = -Bach/2; divergence <= 1e-6";
    case 4: return "conformal covariance of the obstruction (dims 4,6: 1e-6; dim 8: 1e-4) and Weyl (1e-7)";
    case 5: return "Einstein product: obstruction vanishes; parallel tractor annihilates W (1e-7)";
    case 6: return "conformally flat metrics: obstruction vanishes (dims 4,6,8)";
    case 7: return "obstruction is divergence-free (dims 4,6; 1e-6)";
    case 8: return "tractor identity suite (D X identity, metricity, slot algebra, splitting, W symmetries, bottom slot)";
    case 9: return "deformation complex: Weyl-Bianchi trivial in dim 4; C*(C) = Bach; (n-3) Cotton = div Weyl";
    case 10: return "jet engine: flat zeros (1e-12), finite differences (1e-5), sphere closed forms (1e-8)";
    case 11: return "hash convention: quarter double-hash display and associativity on W (1e-8)";
  }
  return "supporting property checks";
}

} // namespace

int main() {
  VerifyReport rep = run_verify("full", 42);

  std::map<int, std::vector<const CheckResult*>> by_criterion;
  for (auto& c : rep.checks) by_criterion[c.criterion].push_back(&c);

  int failed_criteria = 0;
  for (auto& [crit, checks] : by_criterion) {
    bool ok = true;
    double worst = 0, time = 0;
    for (auto* c : checks) {
      ok = ok && c->pass;
      worst = std::max(worst, c->residual / std::max(c->tolerance, 1e-300));
      time += c->seconds;
    }
    // wall-clock limits stated for the two cross-route criteria
    if (crit == 1 && time >= 60.0) ok = false;
    if (crit == 2 && time >= 600.0) ok = false;
    if (!ok) ++failed_criteria;
    if (crit == 0)
      std::printf("[%s] extras: %s (%.1fs)\n", ok ? "PASS" : "FAIL",
                  criterion_text(crit), time);
    else
      std::printf("[%s] criterion %2d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", crit,
                  criterion_text(crit), time);
    for (auto* c : checks)
      std::printf("        %-34s residual %10.3e  tol %8.1e  %s\n", c->name.c_str(),
                  c->residual, c->tolerance, c->pass ? "ok" : "FAIL");
  }
  std::printf("%s: %zu checks in %.1fs\n",
              failed_criteria ? "ACCEPTANCE FAILED" : "acceptance passed",
              rep.checks.size(), rep.seconds);
  return failed_criteria ? 1 : 0;
}
