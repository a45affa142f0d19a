#include "doctest.h"

#include <cmath>

#include "smrs/regime_bsm.hpp"
#include "smrs/volterra.hpp"
#include "fixtures.hpp"

using namespace smrs;
using namespace smrs::testing;

namespace {
GridSpec small_spec() {
  GridSpec spec;
  spec.time_steps = 10;
  spec.price_nodes = 41;
  spec.age_nodes = 6;
  return spec;
}
}  // namespace

TEST_CASE("regime-independent coefficients reproduce the frozen price") {
  const auto m = market_1d({0.03, 0.03, 0.03, 0.03}, {0.25, 0.25, 0.25, 0.25});
  const auto claim = Claim::basket_call({1.0}, 100.0);
  std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Constant(1, 100.0)};
  GridSpec spec = small_spec();
  spec.price_nodes = 161;
  auto grid = Grid::build(m, 1.0, spec, 2, pts);
  SolverOptions opts;
  opts.tol = 1e-4;
  VolterraSolver solver(m, claim, hazards(), grid, opts);
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  CHECK(rep.iterations <= 2);
  const PriceField rho = solver.initial_field();
  CHECK(linear_growth_distance(phi, rho) < 1e-3);
  CHECK(rep.contraction_bound < 1.0);
  for (double r : rep.ratios) CHECK(r < 1.0);

  const StatePoint p{0.0, Eigen::VectorXd::Constant(1, 100.0), 0, {0.0, 0.0}};
  // multilinear interpolation in s carries an O(dz^2) convexity bias
  CHECK(solver.evaluate(phi, p) == doctest::Approx(bsm_price(m, claim, 0, 0.0, 1.0, p.s)).epsilon(1e-3));
}

TEST_CASE("linear claims are reproduced exactly") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto claim = Claim::linear({0.7});
  std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Constant(1, 50.0)};
  auto grid = Grid::build(m, 0.8, small_spec(), 2, pts);
  SolverOptions opts;
  opts.tol = 1e-9;
  VolterraSolver solver(m, claim, hazards(), grid, opts);
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  double worst = 0.0;
  const Grid& g = phi.grid();
  for (int i = 0; i <= g.time_steps(); ++i) {
    for (int x = 0; x < 4; ++x) {
      for (std::size_t af = 0; af < g.age_tuples(i); ++af) {
        for (std::size_t p = 0; p < g.price_count(); ++p) {
          const double s = g.price_at(p)(0);
          worst = std::max(worst, std::abs(phi.value(i, x, af, p) - 0.7 * s) / (1 + s));
        }
      }
    }
  }
  CHECK(worst < 1e-9);
  const StatePoint p{0.13, Eigen::VectorXd::Constant(1, 61.0), 2, {0.05, 0.1}};
  CHECK(solver.evaluate(phi, p) == doctest::Approx(0.7 * 61.0).epsilon(1e-10));
  CHECK(solver.hedge_ratio(phi, p, 0) == doctest::Approx(0.7).epsilon(1e-9));
  const PriceField xi = solver.hedge_field(phi, 0);
  CHECK(linear_growth_norm(xi) > 0.0);
  CHECK(xi.value(3, 1, 0, 20) == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("switching prices respect terminal value, sign and envelope") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto claim = Claim::basket_call({1.0}, 100.0);
  std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Constant(1, 100.0)};
  auto grid = Grid::build(m, 1.0, small_spec(), 2, pts);
  VolterraSolver solver(m, claim, hazards(), grid);
  ConvergenceReport rep;
  const PriceField phi = solver.solve(rep);
  CHECK(rep.converged);
  for (double r : rep.ratios) CHECK(r <= rep.contraction_bound + 0.05);
  const Grid& g = phi.grid();
  for (int i = 0; i <= g.time_steps(); ++i) {
    for (int x = 0; x < 4; ++x) {
      for (std::size_t af = 0; af < g.age_tuples(i); ++af) {
        for (std::size_t p = 0; p < g.price_count(); ++p) {
          const double s = g.price_at(p)(0), v = phi.value(i, x, af, p);
          CHECK(v >= 0.0);
          CHECK(std::abs(v - s) <= 100.0 + 1e-9);
          if (i == g.time_steps()) CHECK(v == claim.payoff(g.price_at(p)));
        }
      }
    }
  }
  // one more step moves the field by less than the tolerance
  const PriceField again = solver.picard_step(phi);
  CHECK(linear_growth_distance(again, phi) < 1e-6);
}
