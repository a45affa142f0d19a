#pragma once

#include <optional>
#include <vector>

#include "smrs/hazard.hpp"
#include "smrs/market.hpp"

namespace smrs::testing {

using Table = std::vector<std::vector<std::optional<RateFunction>>>;

inline HazardModel two_state(RateFunction a, RateFunction b) {
  Table t(2, std::vector<std::optional<RateFunction>>(2));
  t[0][1] = a;
  t[1][0] = b;
  return HazardModel(2, t);
}

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

// n = 1, two components, two states each; r and sigma keyed on the tuple.
inline MarketModel market_1d(std::vector<double> rates, std::vector<double> vols) {
  RegimeSpace space({2, 2});
  std::vector<TimeSeries> r, mu, sig;
  for (int x = 0; x < 4; ++x) {
    r.emplace_back(scalar(rates[x]));
    mu.emplace_back(scalar(0.08));
    sig.emplace_back(scalar(vols[x]));
  }
  return MarketModel(space, 1, Coefficient::per_regime(r), Coefficient::per_regime(mu), Coefficient::per_regime(sig));
}

inline std::vector<HazardModel> hazards() {
  return {two_state(RateFunction::constant(0.8), RateFunction::weibull(1.5, 2.0)),
          two_state(RateFunction::affine(0.3, 0.6), RateFunction::constant(1.1))};
}

}  // namespace smrs::testing
