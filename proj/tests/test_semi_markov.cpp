#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "smrs/error.hpp"
#include "smrs/semi_markov.hpp"

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

TEST_CASE("competing exponentials") {
  const std::vector<HazardModel> models{two_state(RateFunction::constant(1.0), RateFunction::constant(1.0)),
                                        two_state(RateFunction::constant(2.0), RateFunction::constant(1.0))};
  const NextJumpLaw law(models, CsmState{{0, 0}, {0.3, 1.1}});
  CHECK(law.component_prob(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(law.component_prob(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(law.cdf(0, 1.0) == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-10));
  CHECK(law.cdf(0, 0.0) == 0.0);
  CHECK(law.cdf(1, 1e6) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single component and symmetric components") {
  const std::vector<HazardModel> one{two_state(RateFunction::constant(1.5), RateFunction::constant(1.0))};
  const NextJumpLaw solo(one, CsmState{{0}, {0.4}});
  CHECK(solo.component_prob(0) == 1.0);
  CHECK(solo.cdf(0, 0.8) == doctest::Approx(1.0 - std::exp(-1.2)).epsilon(1e-10));

  const auto h = two_state(RateFunction::constant(0.8), RateFunction::constant(0.8));
  const std::vector<HazardModel> three{h, h, h};
  const NextJumpLaw sym(three, CsmState{{0, 1, 0}, {0.2, 0.2, 0.2}});
  for (int l = 0; l < 3; ++l) CHECK(sym.component_prob(l) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("lemma identities for weibull and tabulated") {
  const std::vector<HazardModel> models{
      two_state(RateFunction::weibull(1.3, 2.0), RateFunction::affine(0.2, 0.5)),
      two_state(RateFunction::tabulated({0.0, 0.5, 1.5}, {0.3, 1.1, 0.7}), RateFunction::constant(0.9))};
  const CsmState st{{0, 0}, {0.6, 0.9}};
  const NextJumpLaw law(models, st);
  CHECK(law.raw_prob_sum() == doctest::Approx(1.0).epsilon(1e-8));
  for (int l = 0; l < 2; ++l) {
    const double hazard = models[l].holding_pdf(st.x[l], st.y[l]) / (1.0 - models[l].holding_cdf(st.x[l], st.y[l]));
    CHECK(law.pdf(l, 0.0) * law.component_prob(l) == doctest::Approx(hazard).epsilon(1e-8));
    CHECK(law.cdf(l, law.truncation()) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("simulation matches the holding law") {
  const double c = 1.7;
  const std::vector<HazardModel> models{two_state(RateFunction::constant(c), RateFunction::constant(c))};
  Rng rng = make_stream(11, 0);
  const int sims = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < sims; ++k) {
    const auto path = simulate_csm(models, CsmState{{0}, {0.0}}, 0.0, 100.0, rng);
    const double tau = path.jumps.front().time;
    sum += tau;
    sum2 += tau * tau;
  }
  const double mean = sum / sims;
  const double se = std::sqrt((sum2 / sims - mean * mean) / sims);
  CHECK(std::abs(mean - 1.0 / c) < 3.0 * se);
}

TEST_CASE("simulated holding times pass a KS test") {
  const std::vector<HazardModel> models{two_state(RateFunction::weibull(2.0, 2.0), RateFunction::constant(1.0))};
  Rng rng = make_stream(5, 3);
  std::vector<double> tau;
  for (int k = 0; k < 10000; ++k) {
    tau.push_back(simulate_csm(models, CsmState{{0}, {0.0}}, 0.0, 50.0, rng).jumps.front().time);
  }
  std::sort(tau.begin(), tau.end());
  double d = 0.0;
  const double n = static_cast<double>(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double f = models[0].holding_cdf(0, tau[i]);
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(d < 1.628 / std::sqrt(n));  // 1% critical value
}

TEST_CASE("empirical next component matches the quadrature law") {
  const std::vector<HazardModel> models{
      two_state(RateFunction::weibull(1.0, 2.0), RateFunction::constant(1.0)),
      two_state(RateFunction::affine(0.4, 0.3), RateFunction::constant(1.0))};
  const CsmState st{{0, 0}, {0.5, 0.2}};
  const NextJumpLaw law(models, st);
  Rng rng = make_stream(99, 0);
  const int sims = 20000;
  int first0 = 0;
  for (int k = 0; k < sims; ++k) {
    if (simulate_csm(models, st, 0.0, 200.0, rng).jumps.front().component == 0) ++first0;
  }
  const double p = law.component_prob(0);
  CHECK(std::abs(first0 / double(sims) - p) < 3.0 * std::sqrt(p * (1 - p) / sims));
}

TEST_CASE("simulation is reproducible and short horizons rarely jump") {
  const std::vector<HazardModel> models{two_state(RateFunction::constant(1.0), RateFunction::constant(2.0)),
                                        two_state(RateFunction::constant(0.5), RateFunction::constant(0.5))};
  Rng a = make_stream(3, 7), b = make_stream(3, 7);
  const auto pa = simulate_csm(models, CsmState{{0, 1}, {0.0, 0.0}}, 0.0, 5.0, a);
  const auto pb = simulate_csm(models, CsmState{{0, 1}, {0.0, 0.0}}, 0.0, 5.0, b);
  REQUIRE(pa.jumps.size() == pb.jumps.size());
  for (std::size_t k = 0; k < pa.jumps.size(); ++k) CHECK(pa.jumps[k].time == pb.jumps[k].time);

  Rng c = make_stream(3, 8);
  int jumped = 0;
  for (int k = 0; k < 1000; ++k) jumped += !simulate_csm(models, CsmState{{0, 0}, {0.0, 0.0}}, 0.0, 1e-6, c).jumps.empty();
  CHECK(jumped <= 1);
}
