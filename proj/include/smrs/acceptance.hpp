#pragma once

#include <string>
#include <vector>

namespace smrs {

struct AcceptanceOptions {
  int threads = 1;
  std::vector<int> only;  // criterion ids to run; empty means all
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;   // measured values against their limits
  double seconds = 0.0; // wall time, printed but kept out of the report
};

struct AcceptanceSummary {
  std::vector<CriterionResult> rows;
  bool all_passed = false;
  std::string table;   // one line per criterion
  std::string report;  // JSON, free of timings
};

/// Runs the acceptance criteria on built-in scenarios. Limits are fixed in
/// code; SMRS_ACCEPT_<NAME> environment variables override them.
AcceptanceSummary run_acceptance(const AcceptanceOptions& opts);

}  // namespace smrs
