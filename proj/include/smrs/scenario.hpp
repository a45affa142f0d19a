#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "smrs/grid.hpp"
#include "smrs/hazard.hpp"
#include "smrs/market.hpp"
#include "smrs/volterra.hpp"

namespace smrs {

enum class Output { price_field, hedge_field, mc_check, pde_residual, sensitivity, residual_risk };

std::string to_string(Output o);

struct McSettings {
  std::size_t paths = 100000;
  std::optional<std::uint64_t> seed;  // required whenever a stochastic output is requested
  bool antithetic = false;
};

/// A surface slice for plotting: every price node at one (t, x, y).
struct SurfaceSpec {
  double t = 0.0;
  int regime = 0;
  std::vector<double> ages;
};

/// Fully parsed and validated scenario.
struct Scenario {
  std::string name;
  double maturity = 1.0;
  MarketModel market;
  std::vector<HazardModel> hazards;
  Claim claim;
  GridSpec grid;
  SolverOptions solver;
  McSettings mc;
  std::vector<StatePoint> points;
  std::set<Output> outputs;
  std::vector<double> perturbations;  // hazard scale factors for the sensitivity check
  std::vector<SurfaceSpec> surfaces;
  std::string resolved;               // the configuration with every default filled in, as JSON

  bool wants(Output o) const { return outputs.count(o) > 0; }
  Grid build_grid() const;
};

/// Prefix of the environment variables that override solver settings
/// (SMRS_SOLVER_TOL, SMRS_SOLVER_MAX_ITER, ...).
inline constexpr const char* kEnvPrefix = "SMRS_";

/// Parses JSON text. Throws ConfigError naming the offending field and
/// ValidationError when the model breaks a structural assumption.
Scenario parse_scenario(const std::string& text, bool apply_env = true);
Scenario load_scenario(const std::string& path, bool apply_env = true);

}  // namespace smrs
