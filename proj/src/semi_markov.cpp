#include "smrs/semi_markov.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "smrs/error.hpp"
#include "smrs/quadrature.hpp"

namespace smrs {

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eed5eedu};
  return Rng(seq);
}

// Kronrod error estimates are pessimistic; this still leaves the identities near 1e-13.
constexpr double kLawTol = 1e-10;

NextJumpLaw::NextJumpLaw(std::span<const HazardModel> models, const CsmState& state)
    : models_(models), state_(state) {
  const int n = static_cast<int>(models.size());
  if (static_cast<int>(state.x.size()) != n || static_cast<int>(state.y.size()) != n) {
    throw Error("NextJumpLaw: state size does not match component count");
  }
  base_cum_.resize(n);
  double unit_increment = 0.0;
  for (int m = 0; m < n; ++m) {
    if (!std::isfinite(state.y[m]) || state.y[m] < 0.0) throw Error("NextJumpLaw: ages must be finite and >= 0");
    base_cum_[m] = models[m].cumulative_hazard(state.x[m], state.y[m]);
    unit_increment += models[m].cumulative_hazard(state.x[m], state.y[m] + 1.0) - base_cum_[m];
  }

  // Truncate where the joint survival drops below the threshold; the search
  // window is capped at a multiple of the mean holding time implied by the
  // average hazard over the next unit of time.
  const double target = -std::log(kSurvivalThreshold);
  auto log_decay = [&](double s) {
    double total = 0.0;
    for (int m = 0; m < n; ++m) total += models[m].cumulative_hazard(state.x[m], state.y[m] + s) - base_cum_[m];
    return total;
  };
  const double cap = kCapMultiple / unit_increment;
  if (!(log_decay(cap) >= target)) {
    throw TruncationFailure("joint survival has not decayed below 1e-14 within " +
                            std::to_string(kCapMultiple) + "x the mean holding time");
  }
  std::uintmax_t iters = 200;
  auto tol = [](double lo, double up) { return std::abs(up - lo) <= 1e-10 * std::max(1.0, up); };
  const auto [lo, up] = boost::math::tools::toms748_solve(
      [&](double s) { return log_decay(s) - target; }, 0.0, cap, -target, log_decay(cap) - target, tol,
      iters);
  truncation_ = up;

  probs_.resize(n);
  raw_probs_.resize(n);
  normalizer_.resize(n);
  raw_sum_ = 0.0;
  for (int l = 0; l < n; ++l) {
    raw_probs_[l] = integrate_adaptive([&](double s) { return joint_survival(s) * hazard(l, s); }, 0.0,
                                       truncation_, kLawTol);
    normalizer_[l] = integrate_adaptive([&](double s) { return unnormalized_density(l, s); }, 0.0,
                                        truncation_, kLawTol);
    raw_sum_ += raw_probs_[l];
  }
  for (int l = 0; l < n; ++l) probs_[l] = raw_probs_[l] / raw_sum_;
}

double NextJumpLaw::joint_survival(double s) const {
  double total = 0.0;
  for (std::size_t m = 0; m < models_.size(); ++m) {
    total += models_[m].cumulative_hazard(state_.x[m], state_.y[m] + s) - base_cum_[m];
  }
  return std::exp(-total);
}

double NextJumpLaw::hazard(int l, double s) const {
  return models_[l].exit_rate(state_.x[l], state_.y[l] + s);
}

double NextJumpLaw::unnormalized_density(int l, double s) const {
  double survival = 1.0;
  for (std::size_t m = 0; m < models_.size(); ++m) {
    if (static_cast<int>(m) == l) continue;
    survival *= 1.0 - models_[m].holding_cdf(state_.x[m], state_.y[m] + s);
  }
  return survival * models_[l].holding_pdf(state_.x[l], state_.y[l] + s);
}

double NextJumpLaw::pdf(int l, double v) const {
  if (v < 0.0) return 0.0;
  return unnormalized_density(l, v) / normalizer_[l];
}

double NextJumpLaw::cdf(int l, double v) const {
  if (v <= 0.0) return 0.0;
  const double upper = std::min(v, truncation_);
  const double value =
      integrate_adaptive([&](double s) { return unnormalized_density(l, s); }, 0.0, upper) / normalizer_[l];
  return std::min(1.0, value);
}

RegimePath simulate_csm(std::span<const HazardModel> models, const CsmState& initial, double start,
                        double horizon, Rng& rng) {
  if (!(horizon > start)) throw Error("simulate_csm: horizon must exceed start time");
  const int n = static_cast<int>(models.size());
  RegimePath path;
  path.start = start;
  path.horizon = horizon;
  path.initial = initial;

  std::exponential_distribution<double> exp1(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<int> x = initial.x;
  std::vector<double> age = initial.y;
  double now = start;
  std::vector<double> next(n);
  for (int m = 0; m < n; ++m) next[m] = now + models[m].invert_cumulative(x[m], age[m], exp1(rng));

  while (true) {
    int l = 0;
    for (int m = 1; m < n; ++m) {
      if (next[m] < next[l]) l = m;
    }
    if (next[l] > horizon) break;
    const double t = next[l];
    JumpEvent ev;
    ev.time = t;
    ev.component = l;
    ev.from = x[l];
    ev.ages_before.resize(n);
    for (int m = 0; m < n; ++m) ev.ages_before[m] = age[m] + (t - now);
    const std::vector<double> p = models[l].transition_probs(x[l], ev.ages_before[l]);
    const double u = unif(rng);
    double acc = 0.0;
    int dest = -1;
    for (int j = 0; j < static_cast<int>(p.size()); ++j) {
      if (p[j] <= 0.0) continue;
      dest = j;
      acc += p[j];
      if (u < acc) break;
    }
    ev.to = dest;
    for (int m = 0; m < n; ++m) age[m] = ev.ages_before[m];
    age[l] = 0.0;
    x[l] = dest;
    now = t;
    next[l] = now + models[l].invert_cumulative(x[l], 0.0, exp1(rng));
    path.jumps.push_back(std::move(ev));
  }
  path.terminal.x = x;
  path.terminal.y.resize(n);
  for (int m = 0; m < n; ++m) path.terminal.y[m] = age[m] + (horizon - now);
  return path;
}

}  // namespace smrs
