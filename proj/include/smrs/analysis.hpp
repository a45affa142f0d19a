#pragma once

#include <vector>

#include "smrs/mc_oracle.hpp"
#include "smrs/volterra.hpp"

namespace smrs {

struct SensitivityReport {
  double lambda_sup = 0.0;   // max over l, i != j and sampled ages of |lambda - lambda~|
  double lambda_sum = 0.0;   // max over x of sum_l sum_{j != x^l} sup_y |lambda - lambda~|
  double phi_sup = 0.0;      // max over the shared grid of |phi - phi~|
  double bound = 0.0;        // 2 c2 T lambda_sum
  double slack = 0.0;        // solver tolerance allowance added to the bound
  bool satisfied = false;
  double ratio = 0.0;        // phi_sup / bound, 0 when the bound is 0
  ConvergenceReport base;
  ConvergenceReport perturbed;
};

/// Solves the price for both hazard sets on `grid` and compares with the
/// stability bound. Hazard distances are sampled on [0, T].
SensitivityReport sensitivity_check(const MarketModel& m, const Claim& claim, const std::vector<HazardModel>& models,
                                    const std::vector<HazardModel>& perturbed, const Grid& grid,
                                    const SolverOptions& opts);

/// Hazard-distance part of the bound alone.
double hazard_distance_sum(const RegimeSpace& space, const std::vector<HazardModel>& a,
                           const std::vector<HazardModel>& b, double horizon, double& sup_out);

struct ResidualRiskReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  double mean_jumps = 0.0;             // average regime jumps per path
  std::vector<double> path_costs;      // sum of squared discounted price jumps, per path
};

/// Quadratic residual risk of the locally risk-minimising hedge: physical
/// paths from `start`, squared discounted jumps of the interpolated price at
/// each regime switch, averaged over paths. Discounting starts at start.t.
ResidualRiskReport residual_risk(const MarketModel& m, const std::vector<HazardModel>& models,
                                 const PriceField& field, const StatePoint& start, const McOptions& opts);

}  // namespace smrs
