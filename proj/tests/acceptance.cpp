// Acceptance criteria: one PASS/FAIL line each. With an argument, runs only
// the listed criteria (used by ctest to give each its own entry).

#include "hdg/verify/checks.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= static_cast<int>(hdg::acceptance_checks().size()); ++i) ids.push_back(i);
  bool ok = true;
  for (const int id : ids) {
    const hdg::CheckResult r = hdg::run_check(id);
    std::cout << hdg::format_check(r) << std::endl;
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}
