#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "smrs/pipeline.hpp"
#include "smrs/scenario.hpp"

using namespace smrs;
namespace fs = std::filesystem;

namespace {
const char* kSmall = R"({
  "name": "small",
  "maturity": 0.5,
  "hazards": [{"states": 2, "rates": [
      {"from": 1, "to": 2, "family": "constant", "c": 0.8},
      {"from": 2, "to": 1, "family": "weibull", "c": 1.1, "kappa": 2.0}]}],
  "market": {"assets": 1, "rate": {"per_regime": [0.02, 0.04]}, "drift": 0.05,
             "vol": {"per_regime": [0.2, 0.3]}},
  "claim": {"kind": "basket_put", "weights": [1.0], "strike": 100.0},
  "grid": {"time_steps": 8, "price_nodes": 41, "age_nodes": 5},
  "mc": {"paths": 2000, "seed": 7},
  "points": [{"s": [95.0], "x": [1]}, {"s": [105.0], "x": [2], "y": [0.1], "t": 0.1}],
  "outputs": ["price-field", "hedge-field", "mc-check", "pde-residual", "residual-risk", "sensitivity"],
  "surfaces": [{"t": 0.25, "x": [2], "y": [0.125]}]
})";

struct TempDir {
  fs::path path = fs::temp_directory_path() / ("smrs-pipeline-" + std::to_string(std::rand()));
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}
}  // namespace

TEST_CASE("pipeline writes every requested artifact") {
  const Scenario sc = parse_scenario(kSmall, false);
  TempDir dir;
  const RunResult res = run_scenario(sc, RunOptions{dir.path.string(), 1});
  for (const char* f : {"price_field.csv", "hedge_field.csv", "surface_2_0.125_t0.25.csv", "report.json"}) {
    CHECK_MESSAGE(fs::exists(dir.path / f), f);
  }
  CHECK(res.files.size() == 4);
  CHECK(slurp(dir.path / "report.json") == res.report);

  const auto rep = nlohmann::json::parse(res.report);
  CHECK(rep["status"] == "ok");
  CHECK(rep["convergence"]["converged"] == true);
  CHECK(rep["convergence"]["ratios_below_one"] == true);
  CHECK(rep["points"].size() == 2);
  CHECK(rep["points"][1]["x"] == nlohmann::json::array({2}));
  CHECK(rep["mc_check"][1]["seed"] == 8);
  CHECK(rep["sensitivity"].size() == 2);
  for (const auto& row : rep["sensitivity"]) CHECK(row["satisfied"] == true);
  CHECK(rep["residual_risk"]["estimate"].get<double>() >= 0.0);
  // a put is bounded by its discounted strike
  for (const auto& p : rep["points"]) CHECK(p["price"].get<double>() <= 100.0);

  const std::string surface = slurp(dir.path / "surface_2_0.125_t0.25.csv");
  CHECK(surface.rfind("s1,phi\n", 0) == 0);
  CHECK(std::count(surface.begin(), surface.end(), '\n') == 42);
}

TEST_CASE("pipeline output is independent of the thread count") {
  Scenario sc = parse_scenario(kSmall, false);
  TempDir a, b;
  const RunResult one = run_scenario(sc, RunOptions{a.path.string(), 1});
  const RunResult three = run_scenario(sc, RunOptions{b.path.string(), 3});
  CHECK(one.report == three.report);
  CHECK(slurp(a.path / "hedge_field.csv") == slurp(b.path / "hedge_field.csv"));
}

TEST_CASE("grid description counts stored values") {
  const Scenario sc = parse_scenario(kSmall, false);
  const auto d = nlohmann::json::parse(describe_grid(sc));
  CHECK(d["time_steps"] == 8);
  CHECK(d["price_axes"][0]["nodes"] == 41);
  // 2 regimes x 41 prices x sum over slices of stored age nodes
  const Grid g = sc.build_grid();
  std::size_t expect = 0;
  for (int i = 0; i <= 8; ++i) expect += 2 * 41 * g.age_tuples(i);
  CHECK(d["stored_values"].get<std::size_t>() == expect);
}

TEST_CASE("error report is a JSON object with kind and message") {
  const auto e = nlohmann::json::parse(error_report("ConfigError", "grid.time_steps: must be positive"));
  CHECK(e["status"] == "error");
  CHECK(e["error"]["kind"] == "ConfigError");
  CHECK(e["error"]["message"] == "grid.time_steps: must be positive");
}
