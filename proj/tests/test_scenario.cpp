#include "doctest.h"

#include <cstdlib>
#include <string>

#include "smrs/error.hpp"
#include "smrs/scenario.hpp"

using namespace smrs;

namespace {
std::string minimal(const std::string& hazard_c = "0.8", const std::string& extra = "") {
  return R"({
    "maturity": 1.0,
    "hazards": [{"states": 2, "rates": [
        {"from": 1, "to": 2, "family": "constant", "c": )" +
         hazard_c + R"(},
        {"from": 2, "to": 1, "family": "affine", "a": 0.5, "b": 0.2}]}],
    "market": {"assets": 1, "rate": 0.03, "drift": {"per_regime": [0.05, 0.07]},
               "vol": {"sum": [[0.2, 0.3]]}},
    "claim": {"kind": "basket_call", "weights": [1.0], "strike": 100.0},
    "points": [{"s": [100.0], "x": [2]}])" +
         extra + "\n}";
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text, false);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("minimal scenario fills defaults") {
  const Scenario sc = parse_scenario(minimal(), false);
  CHECK(sc.name == "scenario");
  CHECK(sc.hazards.size() == 1);
  CHECK(sc.market.regimes().size() == 2);
  CHECK(sc.points.size() == 1);
  CHECK(sc.points[0].regime == 1);
  CHECK(sc.points[0].ages == std::vector<double>{0.0});
  CHECK(sc.grid.time_steps == GridSpec{}.time_steps);
  CHECK(sc.solver.tol == SolverOptions{}.tol);
  CHECK(sc.wants(Output::price_field));
  CHECK_FALSE(sc.wants(Output::mc_check));
  CHECK(sc.surfaces.size() == 2);
  CHECK(sc.market.rate(1) == doctest::Approx(0.03));
  CHECK(sc.market.vol(0.5, 1)(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("resolved echo parses back to the same scenario") {
  const Scenario a = parse_scenario(minimal(), false);
  const Scenario b = parse_scenario(a.resolved, false);
  CHECK(a.resolved == b.resolved);
  CHECK(b.grid.price_nodes == a.grid.price_nodes);
  CHECK(b.perturbations == a.perturbations);
}

TEST_CASE("errors name the offending field") {
  CHECK(error_of(minimal("-1.0")).find("(l=0, i=1, j=2)") != std::string::npos);
  CHECK(error_of(minimal("0.8", R"(, "outputs": ["mc-check"])")).find("mc.seed") != std::string::npos);
  CHECK(error_of(minimal("0.8", R"(, "outputs": ["plots"])")).find("outputs[0]") != std::string::npos);
  CHECK(error_of(minimal("0.8", R"(, "grid": {"price_nodes": 2})")).find("grid") != std::string::npos);
  CHECK(error_of("{\n\"maturity\": 1.0,\n oops }").find("line 3") != std::string::npos);
  CHECK(error_of("{\"maturity\": 1.0}").find("hazards") != std::string::npos);
  const std::string bad_x = minimal();
  std::string text = bad_x;
  text.replace(text.find("\"x\": [2]"), 8, "\"x\": [3]");
  CHECK(error_of(text).find("points[0].x") != std::string::npos);
}

TEST_CASE("environment overrides solver settings") {
  setenv("SMRS_SOLVER_TOL", "1e-3", 1);
  const Scenario sc = parse_scenario(minimal());
  CHECK(sc.solver.tol == 1e-3);
  CHECK(sc.resolved.find("0.001") != std::string::npos);
  setenv("SMRS_SOLVER_TOL", "tight", 1);
  CHECK_THROWS_AS(parse_scenario(minimal()), ConfigError);
  unsetenv("SMRS_SOLVER_TOL");
}

TEST_CASE("shipped scenario parses") {
  const Scenario sc = load_scenario(SMRS_SOURCE_DIR "/scenarios/two_state_call.json", false);
  CHECK(sc.mc.seed.value() == 20240601u);
  CHECK(sc.wants(Output::mc_check));
  CHECK(sc.points.size() == 2);
}
