#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "smrs/quadrature.hpp"

namespace smrs {

/// Mixed-radix enumeration of regime tuples x = (x^0, ..., x^n).
class RegimeSpace {
 public:
  explicit RegimeSpace(std::vector<int> states_per_component);

  int components() const { return static_cast<int>(radix_.size()); }
  int states(int l) const { return radix_[l]; }
  int size() const { return size_; }
  int index(std::span<const int> tuple) const;
  std::vector<int> tuple(int index) const;
  /// Index of R^l_j x.
  int replaced(int index, int l, int j) const;
  int component_state(int index, int l) const;

 private:
  std::vector<int> radix_;
  std::vector<int> stride_;
  int size_ = 1;
};

/// Point (t, s, x, y) of the state space; x is a regime index.
struct StatePoint {
  double t = 0.0;
  Eigen::VectorXd s;
  int regime = 0;
  std::vector<double> ages;
};

/// Matrix-valued function of time: constant or piecewise linear through knots,
/// constant outside the knot range.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(Eigen::MatrixXd constant);
  TimeSeries(std::vector<double> knots, std::vector<Eigen::MatrixXd> values);

  Eigen::MatrixXd at(double t) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<Eigen::MatrixXd>& values() const { return values_; }
  bool is_constant() const { return knots_.empty(); }

 private:
  std::vector<double> knots_;
  std::vector<Eigen::MatrixXd> values_;
};

/// Coefficient depending on (t, x): either one series per regime tuple, or a
/// combination ("sum" / "product", elementwise) of per-component terms.
class Coefficient {
 public:
  enum class Combine { sum, product };

  Coefficient() = default;
  static Coefficient per_regime(std::vector<TimeSeries> series);
  static Coefficient factored(Combine rule, std::vector<std::vector<TimeSeries>> terms);

  Eigen::MatrixXd at(double t, int regime, const RegimeSpace& space) const;
  /// Sorted knot times relevant to `regime`.
  std::vector<double> breakpoints(int regime, const RegimeSpace& space) const;

  bool is_factored() const { return factored_; }
  Combine rule() const { return rule_; }
  const std::vector<TimeSeries>& series() const { return series_; }
  const std::vector<std::vector<TimeSeries>>& terms() const { return terms_; }

 private:
  bool factored_ = false;
  Combine rule_ = Combine::sum;
  std::vector<TimeSeries> series_;
  std::vector<std::vector<TimeSeries>> terms_;
};

enum class Measure { physical, risk_neutral };

/// Regime-modulated market: rate r(x), drift mu(t,x), volatility sigma(t,x).
class MarketModel {
 public:
  MarketModel(RegimeSpace space, int assets, Coefficient rate, Coefficient drift, Coefficient vol,
              int time_nodes = 32);

  const RegimeSpace& regimes() const { return space_; }
  int assets() const { return assets_; }
  int time_nodes() const { return time_nodes_; }

  double rate(int regime) const { return rates_[regime]; }
  Eigen::VectorXd drift(double t, int regime) const;
  Eigen::MatrixXd vol(double t, int regime) const;
  Eigen::MatrixXd diffusion(double t, int regime) const;

  /// Integral of a(u, x) over [t, t+v] and of the log drift over the same
  /// window, by composite Gauss-Legendre split at coefficient knots.
  void integrate(double t, double v, int regime, Measure measure, Eigen::VectorXd& log_mean,
                 Eigen::MatrixXd& cov) const;

  /// Checks sigma invertible (condition number < 1e12) at the given times.
  void validate(std::span<const double> times) const;

  const Coefficient& rate_coefficient() const { return rate_; }
  const Coefficient& drift_coefficient() const { return drift_; }
  const Coefficient& vol_coefficient() const { return vol_; }

 private:
  RegimeSpace space_;
  int assets_;
  Coefficient rate_, drift_, vol_;
  int time_nodes_;
  std::vector<double> rates_;
};

/// European payoff K(s) = f(c . s) with f piecewise linear.
class Claim {
 public:
  enum class Kind { basket_call, basket_put, linear, piecewise_linear };

  static Claim basket_call(std::vector<double> weights, double strike);
  static Claim basket_put(std::vector<double> weights, double strike);
  static Claim linear(std::vector<double> weights);
  /// f through (knots, values), extended with the given end slopes.
  static Claim piecewise_linear(std::vector<double> weights, std::vector<double> knots,
                                std::vector<double> values, double left_slope, double right_slope);

  Kind kind() const { return kind_; }
  int assets() const { return static_cast<int>(weights_.size()); }
  const Eigen::VectorXd& weights() const { return weights_; }
  double strike() const { return strike_; }

  double payoff(std::span<const double> s) const;
  double payoff(const Eigen::VectorXd& s) const;
  double profile(double u) const;
  /// Slope of the profile on each linear piece; pieces split at `kinks()`.
  const std::vector<double>& kinks() const { return kinks_; }
  double slope_on_piece(std::size_t piece) const { return slopes_[piece]; }
  double value_at_kink(std::size_t k) const { return kink_values_[k]; }
  /// Piece containing u, and the intercept of the profile on that piece.
  std::size_t piece_of(double u) const;
  double intercept_on_piece(std::size_t piece) const;

  /// Envelope |K(s) - c1 . s| <= c2 and Lipschitz constant (sup of partials).
  const Eigen::VectorXd& c1() const { return c1_; }
  /// Gradient of K as the basket value falls to its lowest reachable level.
  const Eigen::VectorXd& c0() const { return c0_; }
  double c2() const { return c2_; }
  double lipschitz() const { return lipschitz_; }

  Claim scaled(double factor) const;

  /// Random-sample check of K >= 0 and the envelope; throws ValidationError.
  void validate(std::uint64_t seed = 7, int samples = 10000) const;

  std::string kind_name() const;

 private:
  Claim() = default;
  void finish();

  Kind kind_ = Kind::linear;
  Eigen::VectorXd weights_;
  double strike_ = 0.0;
  std::vector<double> kinks_, kink_values_, slopes_;  // slopes_.size() == kinks_.size() + 1
  double offset_ = 0.0;                               // f(0) when there are no kinks
  Eigen::VectorXd c1_, c0_;
  double c2_ = 0.0;
  double lipschitz_ = 0.0;
};

/// Lognormal law of S_{t+v} given S_t = s and no regime change on [t, t+v].
struct LognormalKernel {
  Eigen::VectorXd spot;
  Eigen::VectorXd log_mean;  // mean of ln(S_{t+v} / s)
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;      // lower factor
  Eigen::MatrixXd cov_inv;
  double elapsed = 0.0;
  double log_det = 0.0;

  int dim() const { return static_cast<int>(spot.size()); }
};

LognormalKernel build_kernel(const MarketModel& m, double t, int regime, double v, Measure measure,
                             const Eigen::VectorXd& spot);

/// Re-anchors an already built kernel at another spot.
LognormalKernel with_spot(LognormalKernel kern, const Eigen::VectorXd& spot);

double kernel_density(const LognormalKernel& k, const Eigen::VectorXd& price);
/// d density / d s^m at fixed terminal price.
double kernel_density_ds(const LognormalKernel& k, const Eigen::VectorXd& price, int m);

/// E[g(S_{t+v})] by Gauss-Hermite after Cholesky whitening.
double kernel_expectation(const LognormalKernel& k, const std::function<double(const Eigen::VectorXd&)>& g,
                          const QuadratureOptions& opts = {});

/// E[K(S_{t+v})] and d/ds^m of it (score form), integrating the last whitened
/// axis in closed form between payoff kinks; other axes Gauss-Hermite.
double claim_expectation(const LognormalKernel& k, const Claim& claim, const QuadratureOptions& opts = {});
double claim_expectation_ds(const LognormalKernel& k, const Claim& claim, int m,
                            const QuadratureOptions& opts = {});

}  // namespace smrs
