#pragma once

#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace qicd::app {

struct SelftestOptions {
  // Invariants whose tolerance is replaced by a negative value so that they
  // must fail. Used to check that failures are reported.
  std::set<std::string> corrupt;
};

struct SuiteReport {
  std::string name;
  double seconds = 0.0;
  int checks = 0;
  std::vector<std::string> failures;
};

std::vector<std::string> selftest_invariants();

// Runs every suite, prints one line per suite plus one per failure, and
// returns the reports.
std::vector<SuiteReport> run_selftest(std::ostream& out, const SelftestOptions& opts = {});

}  // namespace qicd::app
