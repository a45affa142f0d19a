#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "smrs/analysis.hpp"

using namespace smrs;
using namespace smrs::testing;

namespace {
GridSpec coarse() {
  GridSpec spec;
  spec.time_steps = 10;
  spec.price_nodes = 61;
  spec.age_nodes = 6;
  return spec;
}

std::vector<HazardModel> constant_hazards() {
  return {two_state(RateFunction::constant(0.8), RateFunction::constant(1.1)),
          two_state(RateFunction::constant(0.5), RateFunction::constant(0.3))};
}

std::vector<HazardModel> scale(const std::vector<HazardModel>& hz, double f) {
  std::vector<HazardModel> out;
  for (const auto& h : hz) out.push_back(h.scaled(f));
  return out;
}

Grid grid_for(const MarketModel& m, double s0) {
  return Grid::build(m, 1.0, coarse(), 2, std::vector<Eigen::VectorXd>{Eigen::VectorXd::Constant(1, s0)});
}

StatePoint origin(double s) { return StatePoint{0.0, Eigen::VectorXd::Constant(1, s), 0, {0.0, 0.0}}; }
}  // namespace

TEST_CASE("hazard distance sums the worst regime row") {
  const auto hz = constant_hazards();
  double sup = 0.0;
  const double sum = hazard_distance_sum(RegimeSpace({2, 2}), hz, scale(hz, 1.5), 1.0, sup);
  // rows: (0.4, 0.55) and (0.25, 0.15)
  CHECK(sum == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(sup == doctest::Approx(0.55).epsilon(1e-14));
}

TEST_CASE("identical hazards give zero distances") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto rep = sensitivity_check(m, Claim::basket_call({1.0}, 100.0), hazards(), hazards(), grid_for(m, 100.0), {});
  CHECK(rep.lambda_sup == 0.0);
  CHECK(rep.bound == 0.0);
  CHECK(rep.phi_sup == 0.0);
  CHECK(rep.satisfied);
}

TEST_CASE("linear claims are insensitive to the hazards") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  SolverOptions opts;
  opts.tol = 1e-10;
  const auto rep = sensitivity_check(m, Claim::linear({1.0}), hazards(), scale(hazards(), 1.5), grid_for(m, 100.0), opts);
  CHECK(rep.lambda_sum > 0.0);
  CHECK(rep.phi_sup < 1e-7);
  CHECK(rep.satisfied);
}

TEST_CASE("perturbed call stays inside the stability bound") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto claim = Claim::basket_call({1.0}, 100.0);
  for (double f : {1.1, 1.5}) {
    const auto rep = sensitivity_check(m, claim, constant_hazards(), scale(constant_hazards(), f), grid_for(m, 100.0), {});
    CHECK(rep.phi_sup > 0.0);
    CHECK(rep.satisfied);
    CHECK(rep.ratio < 1.0);
  }
}

TEST_CASE("residual risk vanishes for a linear claim") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  SolverOptions opts;
  opts.tol = 1e-10;
  VolterraSolver solver(m, Claim::linear({0.7}), hazards(), grid_for(m, 100.0), opts);
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  McOptions mc;
  mc.paths = 2000;
  mc.seed = 4;
  const auto rr = residual_risk(m, hazards(), phi, origin(100.0), mc);
  CHECK(rr.mean_jumps > 0.5);
  CHECK(rr.estimate < 1e-16);
}

TEST_CASE("residual risk is small without regime dependence") {
  const auto m = market_1d({0.03, 0.03, 0.03, 0.03}, {0.25, 0.25, 0.25, 0.25});
  VolterraSolver solver(m, Claim::basket_call({1.0}, 100.0), hazards(), grid_for(m, 100.0));
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  McOptions mc;
  mc.paths = 2000;
  mc.seed = 4;
  const auto rr = residual_risk(m, hazards(), phi, origin(100.0), mc);
  CHECK(rr.mean_jumps > 0.5);
  // only the interpolation bias, weighted by regime-specific hazards, separates the regimes
  CHECK(rr.estimate < 1e-4);
}

TEST_CASE("residual risk of a regime-dependent call") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  VolterraSolver solver(m, Claim::basket_call({1.0}, 100.0), hazards(), grid_for(m, 100.0));
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  McOptions mc;
  mc.paths = 4000;
  mc.seed = 21;
  const auto a = residual_risk(m, hazards(), phi, origin(100.0), mc);
  mc.seed = 22;
  const auto b = residual_risk(m, hazards(), phi, origin(100.0), mc);
  CHECK(a.estimate > 0.0);
  CHECK(std::abs(a.estimate - b.estimate) < 3.0 * std::hypot(a.std_error, b.std_error));
  for (double c : a.path_costs) CHECK(c >= 0.0);

  mc.threads = 3;
  const auto c = residual_risk(m, hazards(), phi, origin(100.0), mc);
  CHECK(c.estimate == b.estimate);

  // nearly frozen regimes: almost no switches, almost no cost
  const auto quiet = residual_risk(m, scale(hazards(), 1e-6), phi, origin(100.0), mc);
  CHECK(quiet.estimate < 1e-3 * a.estimate);
}
