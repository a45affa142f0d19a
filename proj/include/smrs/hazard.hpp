#pragma once

#include <optional>
#include <string>
#include <vector>

namespace smrs {

enum class HazardFamily { constant, affine, weibull, tabulated };

std::string to_string(HazardFamily f);

/// A single transition-rate function lambda_ij(age) >= 0 with closed-form or
/// piecewise-polynomial integral.
class RateFunction {
 public:
  static RateFunction constant(double c);
  /// a + b * age, with a, b >= 0 and a + b > 0.
  static RateFunction affine(double a, double b);
  /// c * age^(kappa - 1); kappa == 1 or kappa >= 2 keeps the rate C1 on [0, inf).
  static RateFunction weibull(double c, double kappa);
  /// Monotone cubic (Fritsch-Carlson) through the knots, zero end slopes and
  /// constant extrapolation past the last knot. The first knot must be 0.
  static RateFunction tabulated(std::vector<double> knots, std::vector<double> values);

  HazardFamily family() const { return family_; }
  double rate(double age) const;
  /// Integral of the rate over [0, age].
  double integral(double age) const;
  /// Same function scaled by a positive factor.
  RateFunction scaled(double factor) const;

  // Parameters, for echoing the configuration.
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

 private:
  RateFunction() = default;
  void build_tabulated();

  HazardFamily family_ = HazardFamily::constant;
  std::vector<double> params_;
  // tabulated only
  std::vector<double> knots_, values_, slopes_, cumulative_;
};

/// Transition-rate structure of one age-dependent semi-Markov component.
/// States are 0-based internally; a missing (i, j) pair is an identically zero rate.
class HazardModel {
 public:
  HazardModel(int states, std::vector<std::vector<std::optional<RateFunction>>> rates);

  int states() const { return states_; }
  bool has_rate(int i, int j) const { return rates_[i][j].has_value(); }
  const std::optional<RateFunction>& rate_function(int i, int j) const { return rates_[i][j]; }

  double rate(int i, int j, double age) const;
  /// |lambda_ii(age)|, the total exit rate.
  double exit_rate(int i, double age) const;
  double cumulative_hazard(int i, double age) const;
  double holding_cdf(int i, double age) const;
  double holding_pdf(int i, double age) const;
  /// Law of the remaining holding time `s` given current age.
  double residual_holding_cdf(int i, double age, double s) const;
  std::vector<double> transition_probs(int i, double age) const;
  /// Solves Lambda_i(age + tau) - Lambda_i(age) = e for tau.
  double invert_cumulative(int i, double age, double e) const;

  /// Every rate multiplied by `factor`.
  HazardModel scaled(double factor) const;
  /// max over `ages` of |lambda_ij - other.lambda_ij|.
  double sup_distance(const HazardModel& other, int i, int j, const std::vector<double>& ages) const;

 private:
  void validate() const;

  int states_;
  std::vector<std::vector<std::optional<RateFunction>>> rates_;
};

}  // namespace smrs
