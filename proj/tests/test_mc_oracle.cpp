#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "smrs/error.hpp"
#include "smrs/mc_oracle.hpp"
#include "smrs/regime_bsm.hpp"

using namespace smrs;
using namespace smrs::testing;

namespace {
StatePoint start_at(double s) { return StatePoint{0.0, Eigen::VectorXd::Constant(1, s), 1, {0.2, 0.0}}; }
}  // namespace

TEST_CASE("simulated paths are consistent") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto hz = hazards();
  Rng rng = make_stream(7, 0);
  for (int k = 0; k < 200; ++k) {
    const PathRecord p = simulate_risk_neutral(m, hz, start_at(100.0), 2.0, rng);
    REQUIRE(p.regime_before.size() == p.regimes.jumps.size());
    int x = 1;
    double prev = 0.0;
    for (int j = 0; j < p.jump_count(); ++j) {
      CHECK(p.regime_before[j] == x);
      CHECK(p.regimes.jumps[j].time > prev);
      CHECK(p.discount_at_jump[j] <= 1.0);
      x = p.regime_after[j];
      prev = p.regimes.jumps[j].time;
    }
    CHECK(m.regimes().index(p.regimes.terminal.x) == x);
    CHECK(p.discount > 0.0);
    CHECK(p.discount <= 1.0);
  }
}

TEST_CASE("zero volatility gives the deterministic growth") {
  const auto m = market_1d({0.03, 0.03, 0.03, 0.03}, {0.0, 0.0, 0.0, 0.0});
  const auto hz = hazards();
  Rng rng = make_stream(1, 0);
  const PathRecord p = simulate_risk_neutral(m, hz, start_at(80.0), 1.5, rng);
  CHECK(p.terminal(0) == doctest::Approx(80.0 * std::exp(0.03 * 1.5)).epsilon(1e-13));
  CHECK(p.discount == doctest::Approx(std::exp(-0.03 * 1.5)).epsilon(1e-13));
}

TEST_CASE("discounted asset is a martingale and linear claims price exactly") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  McOptions opts;
  opts.paths = 20000;
  opts.seed = 11;
  const auto est = mc_price(m, Claim::linear({0.7}), hazards(), start_at(50.0), 1.0, opts);
  CHECK(std::abs(est.estimate - 35.0) < 3.0 * est.std_error);
  CHECK(est.std_error > 0.0);
}

TEST_CASE("regime-independent coefficients match the frozen price") {
  const auto m = market_1d({0.03, 0.03, 0.03, 0.03}, {0.25, 0.25, 0.25, 0.25});
  const auto claim = Claim::basket_call({1.0}, 100.0);
  McOptions opts;
  opts.paths = 20000;
  opts.seed = 3;
  const auto est = mc_price(m, claim, hazards(), start_at(100.0), 1.0, opts);
  const double exact = bsm_price(m, claim, 1, 0.0, 1.0, Eigen::VectorXd::Constant(1, 100.0));
  CHECK(std::abs(est.estimate - exact) < 3.0 * est.std_error);
}

TEST_CASE("estimates are reproducible across thread counts") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto claim = Claim::basket_call({1.0}, 95.0);
  McOptions opts;
  opts.paths = 3000;
  opts.batch = 256;
  opts.seed = 5;
  const auto one = mc_price(m, claim, hazards(), start_at(100.0), 1.0, opts);
  opts.threads = 3;
  const auto three = mc_price(m, claim, hazards(), start_at(100.0), 1.0, opts);
  CHECK(one.estimate == three.estimate);
  CHECK(one.std_error == three.std_error);
}

TEST_CASE("antithetic sampling keeps the mean and cuts the variance") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto claim = Claim::basket_call({1.0}, 100.0);
  McOptions opts;
  opts.paths = 20000;
  opts.seed = 9;
  const auto plain = mc_price(m, claim, hazards(), start_at(100.0), 1.0, opts);
  opts.antithetic = true;
  const auto anti = mc_price(m, claim, hazards(), start_at(100.0), 1.0, opts);
  const double se = std::hypot(plain.std_error, anti.std_error);
  CHECK(std::abs(plain.estimate - anti.estimate) < 3.0 * se);
  CHECK(anti.std_error < plain.std_error);
  CHECK(anti.samples == 10000);
}

TEST_CASE("pairwise statistics match a direct pass") {
  std::vector<double> v;
  for (int k = 0; k < 1000; ++k) v.push_back(std::sin(0.37 * k) * 3.0 + 1.0);
  SampleStats direct;
  for (double x : v) direct.add(x);
  std::vector<SampleStats> parts(7);
  for (std::size_t k = 0; k < v.size(); ++k) parts[k * 7 / v.size()].add(v[k]);
  const SampleStats merged = SampleStats::reduce(parts);
  CHECK(merged.count == direct.count);
  CHECK(merged.mean == doctest::Approx(direct.mean).epsilon(1e-13));
  CHECK(merged.variance() == doctest::Approx(direct.variance()).epsilon(1e-12));
}

TEST_CASE("invalid requests are rejected") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  McOptions opts;
  opts.paths = 50;
  CHECK_THROWS_AS(mc_price(m, Claim::linear({1.0}), hazards(), start_at(100.0), 1.0, opts), Error);
  opts.paths = 101;
  opts.antithetic = true;
  CHECK_THROWS_AS(mc_price(m, Claim::linear({1.0}), hazards(), start_at(100.0), 1.0, opts), Error);
  Rng rng = make_stream(0, 0);
  CHECK_THROWS_AS(simulate_risk_neutral(m, hazards(), start_at(-1.0), 1.0, rng), Error);
}

TEST_CASE("path dump lists every jump") {
  const auto m = market_1d({0.01, 0.05, 0.02, 0.04}, {0.2, 0.35, 0.3, 0.15});
  const auto hz = hazards();
  Rng rng = make_stream(2, 0);
  std::vector<PathRecord> paths;
  std::size_t jumps = 0;
  for (int k = 0; k < 5; ++k) {
    paths.push_back(simulate_risk_neutral(m, hz, start_at(100.0), 1.0, rng));
    jumps += paths.back().regimes.jumps.size();
  }
  std::ostringstream os;
  write_path_csv(os, paths);
  const std::string out = os.str();
  CHECK(out.rfind("path,time,component,from,to,s1\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(out.begin(), out.end(), '\n')) == jumps + 1);
}
