#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "smrs/acceptance.hpp"
#include "smrs/error.hpp"
#include "smrs/pipeline.hpp"
#include "smrs/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kSelftestFailed = 1;
constexpr int kInvalid = 2;
constexpr int kSolverError = 3;

// Best effort: the error body goes to stderr and, when possible, to report.json.
int fail(const std::string& out_dir, const std::string& kind, const std::string& message, int code) {
  const std::string body = smrs::error_report(kind, message);
  std::cerr << body;
  if (!out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream(std::filesystem::path(out_dir) / "report.json", std::ios::binary) << body;
  }
  return code;
}

int run_price(const std::string& config, const std::string& out_dir, int threads, bool dry_run) {
  const smrs::Scenario sc = smrs::load_scenario(config);
  if (dry_run) {
    std::cout << smrs::describe_grid(sc);
    return kOk;
  }
  const smrs::RunResult res = smrs::run_scenario(sc, smrs::RunOptions{out_dir, threads});
  for (const auto& f : res.files) std::cout << f << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regime-switching semi-Markov option pricer"};
  app.require_subcommand(1);

  std::string config, out_dir = "out";
  int threads = 1;
  bool dry_run = false;
  auto* price = app.add_subcommand("price", "solve a scenario and write its outputs");
  price->add_option("config", config, "scenario JSON file")->required();
  price->add_option("--out", out_dir, "output directory");
  price->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  price->add_flag("--dry-run", dry_run, "validate and print the resolved grid only");

  std::string self_out;
  int self_threads = 1;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite on built-in scenarios");
  selftest->add_option("--out", self_out, "also write the acceptance report here");
  selftest->add_option("--threads", self_threads, "worker threads")->check(CLI::PositiveNumber);

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  if (app.got_subcommand("version")) {
    std::cout << "smrs " << SMRS_VERSION << '\n';
    return kOk;
  }
  if (app.got_subcommand("selftest")) {
    try {
      const smrs::AcceptanceSummary sum = smrs::run_acceptance(smrs::AcceptanceOptions{self_threads});
      std::cout << sum.table;
      if (!self_out.empty()) {
        std::filesystem::create_directories(self_out);
        std::ofstream(std::filesystem::path(self_out) / "acceptance.json", std::ios::binary) << sum.report;
      }
      return sum.all_passed ? kOk : kSelftestFailed;
    } catch (const std::exception& e) {
      std::cerr << "selftest aborted: " << e.what() << '\n';
      return kSelftestFailed;
    }
  }
  try {
    return run_price(config, dry_run ? std::string() : out_dir, threads, dry_run);
  } catch (const smrs::ConfigError& e) {
    return fail(dry_run ? "" : out_dir, "ConfigError", e.what(), kInvalid);
  } catch (const smrs::ValidationError& e) {
    return fail(dry_run ? "" : out_dir, "ValidationError", e.what(), kInvalid);
  } catch (const smrs::NoConvergence& e) {
    return fail(out_dir, "NoConvergence", e.what(), kSolverError);
  } catch (const smrs::Error& e) {
    return fail(out_dir, "SolverError", e.what(), kSolverError);
  } catch (const std::exception& e) {
    return fail(out_dir, "InternalError", e.what(), kSolverError);
  }
}
