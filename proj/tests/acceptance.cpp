// One line per acceptance criterion; exit status 0 iff every criterion passes within budget.
#include <cstdio>
#include <string>

#include "qwalk/verify.hpp"

int main(int argc, char** argv) {
  qwalk::VerifyOptions opts;
  opts.output_dir = argc > 1 ? argv[1] : "acceptance_output";
  const qwalk::VerifyReport report = qwalk::verify_all(opts);
  int failed = 0;
  for (const auto& c : report.criteria) {
    const bool ok = c.passed && c.within_budget();
    failed += ok ? 0 : 1;
    std::printf("criterion %2d %-4s %-30s [%s] %.2f s (budget %.0f s)%s\n", c.info.id, ok ? "PASS" : "FAIL",
                c.info.name.c_str(), c.info.module.c_str(), c.runtime_s, c.info.budget_s,
                c.within_budget() ? "" : " over budget");
  }
  std::printf("\n%s", report.text.c_str());
  std::printf("acceptance: %zu/%zu criteria pass\n", report.criteria.size() - failed, report.criteria.size());
  return failed == 0 ? 0 : 1;
}
