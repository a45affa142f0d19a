#include "smrs/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "smrs/error.hpp"

namespace smrs {

double hazard_distance_sum(const RegimeSpace& space, const std::vector<HazardModel>& a,
                           const std::vector<HazardModel>& b, double horizon, double& sup_out) {
  const int c = space.components();
  if (static_cast<int>(a.size()) != c || static_cast<int>(b.size()) != c) {
    throw Error("sensitivity: hazard sets do not match the regime space");
  }
  constexpr int kSamples = 1001;
  std::vector<double> ages(kSamples);
  for (int k = 0; k < kSamples; ++k) ages[k] = horizon * k / (kSamples - 1);
  // per component and source state: sum over targets of the sup distance
  std::vector<std::vector<double>> row(c);
  sup_out = 0.0;
  for (int l = 0; l < c; ++l) {
    if (a[l].states() != b[l].states()) throw Error("sensitivity: state counts differ");
    row[l].assign(a[l].states(), 0.0);
    for (int i = 0; i < a[l].states(); ++i) {
      for (int j = 0; j < a[l].states(); ++j) {
        if (i == j) continue;
        const double d = a[l].sup_distance(b[l], i, j, ages);
        row[l][i] += d;
        sup_out = std::max(sup_out, d);
      }
    }
  }
  double worst = 0.0;
  for (int x = 0; x < space.size(); ++x) {
    double sum = 0.0;
    for (int l = 0; l < c; ++l) sum += row[l][space.component_state(x, l)];
    worst = std::max(worst, sum);
  }
  return worst;
}

SensitivityReport sensitivity_check(const MarketModel& m, const Claim& claim, const std::vector<HazardModel>& models,
                                    const std::vector<HazardModel>& perturbed, const Grid& grid,
                                    const SolverOptions& opts) {
  SensitivityReport rep;
  const double big_t = grid.maturity();
  rep.lambda_sum = hazard_distance_sum(m.regimes(), models, perturbed, big_t, rep.lambda_sup);
  rep.bound = 2.0 * claim.c2() * big_t * rep.lambda_sum;

  const VolterraSolver base(m, claim, models, grid, opts);
  const VolterraSolver other(m, claim, perturbed, grid, opts);
  const PriceField phi = base.solve(rep.base);
  const PriceField tilde = other.solve(rep.perturbed);

  double s_max = 0.0;
  for (int a = 0; a < grid.assets(); ++a) s_max += grid.lattice(a).upper();
  for (int i = 0; i <= grid.time_steps(); ++i) {
    const auto& p = phi.slice(i);
    const auto& q = tilde.slice(i);
    for (std::size_t k = 0; k < p.size(); ++k) rep.phi_sup = std::max(rep.phi_sup, std::abs(p[k] - q[k]));
  }
  // both fields carry a Picard remainder of order tol on the scaled norm
  rep.slack = 2.0 * opts.tol * (1.0 + s_max);
  rep.satisfied = rep.phi_sup <= rep.bound + rep.slack;
  rep.ratio = rep.bound > 0.0 ? rep.phi_sup / rep.bound : 0.0;
  return rep;
}

ResidualRiskReport residual_risk(const MarketModel& m, const std::vector<HazardModel>& models,
                                 const PriceField& field, const StatePoint& start, const McOptions& opts) {
  if (opts.paths < 100) throw Error("residual_risk: at least 100 paths are required");
  const double big_t = field.grid().maturity();
  if (!(start.t >= 0.0 && start.t < big_t)) throw Error("residual_risk: start time outside [0, T)");
  ResidualRiskReport rep;
  rep.paths = opts.paths;
  rep.path_costs.assign(opts.paths, 0.0);
  std::vector<std::size_t> jumps(opts.paths, 0);
  const SampleStats st = run_batches(opts.paths, opts, [&](Rng& rng, std::size_t id) {
    const PathRecord p = simulate_path(m, models, start, big_t, Measure::physical, rng);
    double cost = 0.0;
    std::vector<double> ages;
    for (int k = 0; k < p.jump_count(); ++k) {
      const JumpEvent& ev = p.regimes.jumps[k];
      ages = ev.ages_before;
      const double before = field.interpolate(ev.time, p.s_at_jump[k], p.regime_before[k], ages);
      ages[ev.component] = 0.0;
      const double after = field.interpolate(ev.time, p.s_at_jump[k], p.regime_after[k], ages);
      const double jump = p.discount_at_jump[k] * (after - before);
      cost += jump * jump;
    }
    rep.path_costs[id] = cost;
    jumps[id] = static_cast<std::size_t>(p.jump_count());
    return cost;
  });
  rep.estimate = st.mean;
  rep.std_error = st.std_error();
  double total = 0.0;
  for (std::size_t j : jumps) total += static_cast<double>(j);
  rep.mean_jumps = total / static_cast<double>(opts.paths);
  return rep;
}

}  // namespace smrs
