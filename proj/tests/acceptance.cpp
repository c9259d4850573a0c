// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances live with each check in noma/verify.hpp.
#include <cstdio>
#include <map>
#include <vector>

#include "noma/verify.hpp"

int main() {
  const auto report = noma::run_verify(noma::Suite::Full, 42);
  std::map<int, std::vector<const noma::Check*>> by_criterion;
  for (const auto& c : report.checks) by_criterion[c.criterion].push_back(&c);

  for (const auto& [criterion, checks] : by_criterion) {
    bool ok = true;
    for (const auto* c : checks) ok = ok && c->passed;
    std::printf("%s criterion %d (%zu checks)\n", ok ? "PASS" : "FAIL", criterion, checks.size());
    for (const auto* c : checks) {
      if (!c->passed) {
        std::printf("    failed: %s expected=%.9g observed=%.9g tol=%.3g\n", c->name.c_str(),
                    c->expected, c->observed, c->tolerance);
      }
    }
  }
  std::printf("%s overall, %.1f s\n", report.overall ? "PASS" : "FAIL", report.wall_time_s);
  return report.overall ? 0 : 1;
}
