#pragma once

#include <Eigen/Dense>

#include "smrs/market.hpp"

namespace smrs {

/// Frozen-regime price rho_x(t, s) = e^{-r(x)(T-t)} E[K(S_T)] under the
/// risk-neutral lognormal law with the regime held at x.
double bsm_price(const MarketModel& m, const Claim& claim, int regime, double t, double maturity,
                 const Eigen::VectorXd& s, const QuadratureOptions& opts = {});

/// d rho_x / d s^asset.
double bsm_delta(const MarketModel& m, const Claim& claim, int regime, double t, double maturity,
                 const Eigen::VectorXd& s, int asset, const QuadratureOptions& opts = {});

/// Same quantities from a kernel already built for v = T - t; `rate` is r(x).
double bsm_price(const LognormalKernel& k, const Claim& claim, double rate, const QuadratureOptions& opts = {});
double bsm_delta(const LognormalKernel& k, const Claim& claim, double rate, int asset,
                 const QuadratureOptions& opts = {});

/// Partial derivative of the payoff itself (right derivative at kinks).
double payoff_gradient(const Claim& claim, const Eigen::VectorXd& s, int asset);

}  // namespace smrs
