#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mqclab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct SelftestOptions {
  // Run only checks whose name contains one of these substrings; empty runs
  // everything.
  std::vector<std::string> filter;
  // Directory for scratch files (determinism check); empty uses the system
  // temp directory.
  std::string scratch_dir;
};

// Runs the full verification suite: analytic oracles, conservation laws,
// route equivalence, splitting convergence, the N = 12 localization and
// equilibrium runs, the model fixed point, fit correctness and output
// determinism. One line per check goes to `log` as it completes.
std::vector<CheckResult> run_selftest(const SelftestOptions& options,
                                      std::ostream& log);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace mqclab
