#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "smrs/acceptance.hpp"

// Usage: smrs_acceptance [--threads N] [--report FILE] [criterion ids...]
int main(int argc, char** argv) {
  smrs::AcceptanceOptions opts;
  std::string report;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--threads" && k + 1 < argc) {
      opts.threads = std::atoi(argv[++k]);
    } else if (arg == "--report" && k + 1 < argc) {
      report = argv[++k];
    } else {
      opts.only.push_back(std::atoi(arg.c_str()));
    }
  }
  const smrs::AcceptanceSummary sum = smrs::run_acceptance(opts);
  std::cout << sum.table;
  if (!report.empty()) std::ofstream(report, std::ios::binary) << sum.report;
  return sum.all_passed ? 0 : 1;
}
