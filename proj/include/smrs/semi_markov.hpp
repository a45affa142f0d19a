#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "smrs/hazard.hpp"

namespace smrs {

/// Regime tuple x (0-based states) and ages y of the n+1 components.
struct CsmState {
  std::vector<int> x;
  std::vector<double> y;
};

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream id); same pair, same sequence.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Conditional law of the next jump of a componentwise semi-Markov state:
/// which component jumps first, and after how long given that it is that one.
class NextJumpLaw {
 public:
  static constexpr double kSurvivalThreshold = 1e-14;
  static constexpr double kCapMultiple = 50.0;

  NextJumpLaw(std::span<const HazardModel> models, const CsmState& state);

  int components() const { return static_cast<int>(probs_.size()); }
  /// P(next jump in component l), normalized to sum to one.
  double component_prob(int l) const { return probs_[l]; }
  const std::vector<double>& component_probs() const { return probs_; }
  /// Sum of the raw quadratures before normalization.
  double raw_prob_sum() const { return raw_sum_; }
  double raw_component_prob(int l) const { return raw_probs_[l]; }

  /// Conditional cdf / pdf of the waiting time given component l jumps first.
  double cdf(int l, double v) const;
  double pdf(int l, double v) const;

  /// Point where the joint survival falls below the threshold.
  double truncation() const { return truncation_; }

  /// Joint survival of all clocks after waiting s.
  double joint_survival(double s) const;
  /// Exit rate of component l after waiting s.
  double hazard(int l, double s) const;

 private:
  // prod_{m != l} (1 - F^m(s + y^m)) f^l(s + y^l), unnormalized by ages.
  double unnormalized_density(int l, double s) const;

  std::span<const HazardModel> models_;
  CsmState state_;
  std::vector<double> base_cum_;     // Lambda_m(y^m)
  std::vector<double> probs_, raw_probs_, normalizer_;
  double raw_sum_ = 0.0;
  double truncation_ = 0.0;
};

struct JumpEvent {
  double time = 0.0;
  int component = 0;
  int from = 0;
  int to = 0;
  std::vector<double> ages_before;  // all component ages just before the jump
};

struct RegimePath {
  double start = 0.0;
  double horizon = 0.0;
  CsmState initial;
  std::vector<JumpEvent> jumps;
  CsmState terminal;
};

/// Exact simulation by exponential-clock inversion; ties go to the lowest component.
RegimePath simulate_csm(std::span<const HazardModel> models, const CsmState& initial, double start,
                        double horizon, Rng& rng);

}  // namespace smrs
