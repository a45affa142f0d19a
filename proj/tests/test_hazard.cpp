#include "doctest.h"

#include <cmath>

#include "smrs/error.hpp"
#include "smrs/hazard.hpp"
#include "smrs/quadrature.hpp"

using namespace smrs;
using Table = std::vector<std::vector<std::optional<RateFunction>>>;

namespace {
HazardModel two_state(RateFunction a, RateFunction b) {
  Table t(2, std::vector<std::optional<RateFunction>>(2));
  t[0][1] = a;
  t[1][0] = b;
  return HazardModel(2, t);
}
}  // namespace

TEST_CASE("cumulative hazard closed forms") {
  const auto h = two_state(RateFunction::constant(0.5), RateFunction::constant(1.0));
  CHECK(h.cumulative_hazard(0, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(h.cumulative_hazard(0, 0.0) == 0.0);

  const auto w = two_state(RateFunction::weibull(2.0, 2.0), RateFunction::constant(1.0));
  const double oracle = integrate_adaptive([](double v) { return 2.0 * v; }, 0.0, 3.0);
  CHECK(w.cumulative_hazard(0, 3.0) == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(w.cumulative_hazard(0, 3.0) == doctest::Approx(9.0).epsilon(1e-14));
}

TEST_CASE("holding laws") {
  const auto h = two_state(RateFunction::constant(0.5), RateFunction::constant(1.0));
  CHECK(h.holding_cdf(0, 2.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(h.holding_cdf(0, 0.0) == 0.0);
  CHECK(h.holding_pdf(0, 0.0) == doctest::Approx(0.5));

  const auto w = two_state(RateFunction::weibull(2.0, 2.0), RateFunction::constant(1.0));
  CHECK(w.holding_cdf(0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));
  CHECK(w.holding_pdf(0, 1.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("residual holding cdf and memorylessness") {
  const auto h = two_state(RateFunction::constant(0.7), RateFunction::constant(1.0));
  CHECK(h.residual_holding_cdf(0, 0.0, 1.3) == doctest::Approx(h.residual_holding_cdf(0, 5.0, 1.3)).epsilon(1e-14));
  CHECK(h.residual_holding_cdf(0, 2.0, 0.0) == 0.0);

  const auto w = two_state(RateFunction::weibull(2.0, 2.0), RateFunction::constant(1.0));
  CHECK(w.residual_holding_cdf(0, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-14));
  CHECK(w.residual_holding_cdf(0, 0.0, 1.0) != doctest::Approx(w.residual_holding_cdf(0, 1.0, 1.0)));
}

TEST_CASE("transition probabilities") {
  const auto h = two_state(RateFunction::constant(0.7), RateFunction::constant(1.0));
  auto p = h.transition_probs(0, 0.3);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 1.0);

  Table t(3, std::vector<std::optional<RateFunction>>(3));
  t[0][1] = RateFunction::constant(1.0);
  t[0][2] = RateFunction::affine(0.0, 1.0);
  t[1][0] = RateFunction::constant(1.0);
  t[2][0] = RateFunction::constant(1.0);
  const HazardModel k3(3, t);
  p = k3.transition_probs(0, 1.0);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == doctest::Approx(0.5));
  CHECK(p[2] == doctest::Approx(0.5));
  double sum = 0.0;
  for (double q : k3.transition_probs(0, 2.7)) sum += q;
  CHECK(sum == 1.0);
}

TEST_CASE("tabulated hazard integrates its interpolant") {
  const auto tab = RateFunction::tabulated({0.0, 0.5, 1.0, 2.0}, {0.4, 0.9, 0.6, 1.2});
  for (double a : {0.1, 0.5, 0.77, 1.5, 2.0, 3.5}) {
    const double oracle = integrate_adaptive([&](double v) { return tab.rate(v); }, 0.0, a, 1e-14);
    CHECK(tab.integral(a) == doctest::Approx(oracle).epsilon(1e-12));
  }
  // beyond the last knot the rate stays at the final value
  CHECK(tab.rate(10.0) == doctest::Approx(1.2));
}

TEST_CASE("inverse cumulative hazard") {
  const auto tab = two_state(RateFunction::tabulated({0.0, 1.0, 2.0}, {0.5, 1.5, 0.8}), RateFunction::constant(1.0));
  const auto aff = two_state(RateFunction::affine(0.3, 0.8), RateFunction::constant(1.0));
  const auto wei = two_state(RateFunction::weibull(1.7, 2.5), RateFunction::constant(1.0));
  for (const HazardModel* h : {&tab, &aff, &wei}) {
    for (double age : {0.0, 0.4, 1.7}) {
      for (double e : {0.01, 0.7, 3.0}) {
        const double tau = h->invert_cumulative(0, age, e);
        CHECK(h->cumulative_hazard(0, age + tau) - h->cumulative_hazard(0, age) == doctest::Approx(e).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("validation rejects bad specs") {
  CHECK_THROWS_AS(RateFunction::constant(-1.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::affine(-0.1, 1.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::affine(0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(RateFunction::tabulated({0.0, 1.0, 0.5}, {1.0, 1.0, 1.0}), ValidationError);
  Table t(3, std::vector<std::optional<RateFunction>>(3));
  t[0][1] = RateFunction::constant(1.0);
  t[1][0] = RateFunction::constant(1.0);
  t[2][0] = RateFunction::constant(1.0);
  // state 2 is never entered
  CHECK_THROWS_AS(HazardModel(3, t), ValidationError);
}
