#pragma once

#include <string>
#include <vector>

#include "smrs/scenario.hpp"

namespace smrs {

struct RunOptions {
  std::string out_dir = "out";
  int threads = 1;
};

struct RunResult {
  std::string report;               // report.json contents
  std::vector<std::string> files;   // written paths, in write order
};

/// Solves the scenario, runs every requested stage and writes the CSV and
/// JSON outputs. The report holds no timings, so equal inputs give equal bytes.
RunResult run_scenario(const Scenario& sc, const RunOptions& opts);

/// The resolved grid as JSON, without solving anything.
std::string describe_grid(const Scenario& sc);

/// JSON body reported when a run fails.
std::string error_report(const std::string& kind, const std::string& message);

}  // namespace smrs
