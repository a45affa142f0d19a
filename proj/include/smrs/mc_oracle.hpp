#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "smrs/market.hpp"
#include "smrs/semi_markov.hpp"

namespace smrs {

/// One exactly simulated path from a start point to the horizon.
struct PathRecord {
  RegimePath regimes;
  std::vector<int> regime_before;              // regime index just before each jump
  std::vector<int> regime_after;               // and just after
  std::vector<Eigen::VectorXd> s_at_jump;      // asset vector at each jump time
  std::vector<double> discount_at_jump;        // exp(-int_start^{T_m} r)
  Eigen::VectorXd terminal;
  double discount = 1.0;                       // exp(-int_start^T r)

  int jump_count() const { return static_cast<int>(regimes.jumps.size()); }
};

/// Samples the regime path, then draws each inter-jump log-return exactly
/// from its Gaussian law under the chosen measure.
PathRecord simulate_path(const MarketModel& m, std::span<const HazardModel> models, const StatePoint& start,
                         double horizon, Measure measure, Rng& rng);

/// Same regime path, mirrored Gaussian draws.
std::pair<PathRecord, PathRecord> simulate_antithetic(const MarketModel& m, std::span<const HazardModel> models,
                                                      const StatePoint& start, double horizon, Measure measure,
                                                      Rng& rng);

inline PathRecord simulate_risk_neutral(const MarketModel& m, std::span<const HazardModel> models,
                                        const StatePoint& start, double horizon, Rng& rng) {
  return simulate_path(m, models, start, horizon, Measure::risk_neutral, rng);
}

struct McOptions {
  std::size_t paths = 100000;
  std::uint64_t seed = 0;
  bool antithetic = false;
  int threads = 1;
  std::size_t batch = 1024;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t samples = 0;  // independent draws; pairs when antithetic
};

/// Running mean and centred second moment; merges are order-sensitive, so
/// callers combine in a fixed tree.
struct SampleStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v);
  static SampleStats merge(const SampleStats& a, const SampleStats& b);
  /// Pairwise reduction in index order.
  static SampleStats reduce(std::span<const SampleStats> parts);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double std_error() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

/// Draws `samples` values with sample(rng, index) in batches of opts.batch;
/// batch b owns the stream (seed, b) and results are merged pairwise, so the
/// statistics do not depend on opts.threads.
SampleStats run_batches(std::size_t samples, const McOptions& opts,
                        const std::function<double(Rng&, std::size_t)>& sample);

/// Monte Carlo price E[exp(-int r) K(S_T)] from `start`. Batch b uses the
/// stream (seed, b), so the result does not depend on the thread count.
McEstimate mc_price(const MarketModel& m, const Claim& claim, std::span<const HazardModel> models,
                    const StatePoint& start, double horizon, const McOptions& opts);

/// Path-id, time, component (0-based), from/to state (1-based), assets at the jump.
void write_path_csv(std::ostream& os, std::span<const PathRecord> paths);

}  // namespace smrs
