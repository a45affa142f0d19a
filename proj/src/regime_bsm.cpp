#include "smrs/regime_bsm.hpp"

#include <cmath>

#include "smrs/error.hpp"

namespace smrs {

namespace {
void check_time(double t, double maturity) {
  if (!(t >= 0.0 && t <= maturity)) throw Error("regime price: t must lie in [0, T]");
}
}  // namespace

double payoff_gradient(const Claim& claim, const Eigen::VectorXd& s, int asset) {
  const double u = claim.weights().dot(s);
  return claim.slope_on_piece(claim.piece_of(u)) * claim.weights()(asset);
}

double bsm_price(const LognormalKernel& k, const Claim& claim, double rate, const QuadratureOptions& opts) {
  return std::exp(-rate * k.elapsed) * claim_expectation(k, claim, opts);
}

double bsm_delta(const LognormalKernel& k, const Claim& claim, double rate, int asset, const QuadratureOptions& opts) {
  return std::exp(-rate * k.elapsed) * claim_expectation_ds(k, claim, asset, opts);
}

double bsm_price(const MarketModel& m, const Claim& claim, int regime, double t, double maturity,
                 const Eigen::VectorXd& s, const QuadratureOptions& opts) {
  check_time(t, maturity);
  if (t == maturity) return claim.payoff(s);
  const auto k = build_kernel(m, t, regime, maturity - t, Measure::risk_neutral, s);
  return bsm_price(k, claim, m.rate(regime), opts);
}

double bsm_delta(const MarketModel& m, const Claim& claim, int regime, double t, double maturity,
                 const Eigen::VectorXd& s, int asset, const QuadratureOptions& opts) {
  check_time(t, maturity);
  if (t == maturity) return payoff_gradient(claim, s, asset);
  const auto k = build_kernel(m, t, regime, maturity - t, Measure::risk_neutral, s);
  return bsm_delta(k, claim, m.rate(regime), asset, opts);
}

}  // namespace smrs
