#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "smrs/grid.hpp"
#include "smrs/hazard.hpp"
#include "smrs/market.hpp"
#include "smrs/stencil.hpp"

namespace smrs {

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 200;
  int v_nodes = 8;  // Gauss-Legendre nodes per time panel
  QuadratureOptions quad;
  int threads = 1;
};

struct ConvergenceReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> deltas;  // ||phi_{k+1} - phi_k||_L
  std::vector<double> ratios;  // deltas[k] / deltas[k-1]
  double contraction_bound = 0.0;  // max over nodes of sum_l P_l F_l(T - t)
  std::size_t age_clamps = 0;      // age lookups clamped onto the diagonal, last sweep
};

struct ResidualStats {
  double max_scaled = 0.0;
  double mean_scaled = 0.0;
  std::size_t points = 0;
};

/// Picard solver for the Volterra equation of the price on a Grid.
class VolterraSolver {
 public:
  VolterraSolver(const MarketModel& market, const Claim& claim, std::vector<HazardModel> models, Grid grid,
                 SolverOptions opts = {});

  const Grid& grid() const { return grid_; }
  const MarketModel& market() const { return market_; }
  const Claim& claim() const { return claim_; }
  const std::vector<HazardModel>& models() const { return models_; }
  const SolverOptions& options() const { return opts_; }
  double maturity() const { return grid_.maturity(); }

  /// rho_x(t_i, s) at every node, broadcast over ages; terminal slice is K.
  PriceField initial_field() const;
  /// One application of the integral operator (out of place).
  PriceField picard_step(const PriceField& field) const;
  /// Iterates from the initial field until the sup-norm step drops below tol.
  PriceField solve(ConvergenceReport& report) const;

  /// Maximum over the grid of sum_l P_l F_l(T - t).
  double contraction_bound() const { return bound_; }

  /// The operator applied at an arbitrary point, reading `field` for t' > t.
  double evaluate(const PriceField& field, const StatePoint& p) const;
  /// Analytic s^asset derivative of evaluate().
  double hedge_ratio(const PriceField& field, const StatePoint& p, int asset) const;
  /// d phi / d s^asset at every node.
  PriceField hedge_field(const PriceField& field, int asset) const;

  /// Non-local PDE residual over the interior region (t <= 0.75 T, log-price
  /// inside the central half of the box), scaled by 1 + |s|_1.
  ResidualStats pde_residual(const PriceField& field) const;

 private:
  struct LawEntry;

  void build_laws();
  void build_rho();
  void build_stencils();
  // value (asset < 0) or derivative sweep writing slice i of `out` from `in`
  std::size_t sweep_slice(const PriceField& in, int i, std::vector<double>& out, int asset) const;
  double apply_operator(const PriceField& field, const StatePoint& p, int asset) const;
  std::size_t law_index(int x, std::size_t full_age) const;
  std::size_t full_age_index(int i, std::size_t age_flat) const;
  const HatWeights& stencil(int i, int j, int x) const;

  const MarketModel& market_;
  Claim claim_;
  std::vector<HazardModel> models_;
  Grid grid_;
  SolverOptions opts_;
  RegimeSpace space_;
  int states_max_ = 0;
  std::size_t full_tuples_ = 0;  // age_nodes^components
  EdgeSlopes edges_;

  // laws per (x, full age tuple): P_l, and per (l, d) the rising/falling hat
  // integrals of f_{tau|l}(v) p_{x^l d}(y^l + v) over panel a
  std::vector<double> prob_;
  std::vector<double> rise_, fall_;
  std::vector<char> law_ready_;
  double bound_ = 0.0;

  std::vector<std::vector<double>> rho_;  // [i][x * P + p]
  std::vector<HatWeights> stencils_;      // (i, j > i, x)
  std::vector<std::size_t> stencil_offset_;
};

}  // namespace smrs
