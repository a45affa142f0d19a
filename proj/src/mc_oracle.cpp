#include "smrs/mc_oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>

#include "smrs/error.hpp"
#include "smrs/format.hpp"
#include "smrs/parallel.hpp"

namespace smrs {
namespace {

// Square root of a covariance; falls back to the eigen route when it is only
// semi-definite (zero volatility on some axis).
Eigen::MatrixXd cov_root(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

void check_start(const MarketModel& m, std::span<const HazardModel> models, const StatePoint& start,
                 double horizon) {
  if (start.s.size() != m.assets()) throw Error("simulate: start price has the wrong length");
  if ((start.s.array() <= 0.0).any()) throw Error("simulate: start prices must be positive");
  if (static_cast<int>(models.size()) != m.regimes().components() ||
      static_cast<int>(start.ages.size()) != m.regimes().components()) {
    throw Error("simulate: component count mismatch");
  }
  if (start.regime < 0 || start.regime >= m.regimes().size()) throw Error("simulate: regime index out of range");
  if (!(horizon > start.t)) throw Error("simulate: horizon must exceed the start time");
}

// Lays the Gaussian draws `z` (one block of n per segment) over the regime path.
PathRecord assemble(const MarketModel& m, const StatePoint& start, const RegimePath& rp, Measure measure,
                    const std::vector<double>& z, double sign) {
  const RegimeSpace& space = m.regimes();
  const int n = m.assets();
  PathRecord rec;
  rec.regimes = rp;
  Eigen::VectorXd log_s = start.s.array().log().matrix();
  Eigen::VectorXd mean, eps(n);
  Eigen::MatrixXd cov;
  int x = start.regime;
  std::vector<int> tuple = space.tuple(x);
  double now = start.t;
  double log_disc = 0.0;
  std::size_t draw = 0;

  auto advance = [&](double until) {
    const double v = until - now;
    if (v > 0.0) {
      m.integrate(now, v, x, measure, mean, cov);
      for (int a = 0; a < n; ++a) eps(a) = sign * z[draw + a];
      log_s += mean + cov_root(cov) * eps;
      log_disc -= m.rate(x) * v;
    }
    draw += n;
    now = until;
  };

  for (const JumpEvent& ev : rp.jumps) {
    advance(ev.time);
    rec.regime_before.push_back(x);
    tuple[ev.component] = ev.to;
    x = space.index(tuple);
    rec.regime_after.push_back(x);
    rec.s_at_jump.push_back(log_s.array().exp().matrix());
    rec.discount_at_jump.push_back(std::exp(log_disc));
  }
  advance(rp.horizon);
  rec.terminal = log_s.array().exp().matrix();
  rec.discount = std::exp(log_disc);
  return rec;
}

RegimePath draw_regimes(const MarketModel& m, std::span<const HazardModel> models, const StatePoint& start,
                        double horizon, Rng& rng) {
  check_start(m, models, start, horizon);
  return simulate_csm(models, CsmState{m.regimes().tuple(start.regime), start.ages}, start.t, horizon, rng);
}

std::vector<double> draw_normals(std::size_t count, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(count);
  for (double& v : z) v = normal(rng);
  return z;
}

}  // namespace

PathRecord simulate_path(const MarketModel& m, std::span<const HazardModel> models, const StatePoint& start,
                         double horizon, Measure measure, Rng& rng) {
  const RegimePath rp = draw_regimes(m, models, start, horizon, rng);
  const auto z = draw_normals((rp.jumps.size() + 1) * m.assets(), rng);
  return assemble(m, start, rp, measure, z, 1.0);
}

std::pair<PathRecord, PathRecord> simulate_antithetic(const MarketModel& m, std::span<const HazardModel> models,
                                                      const StatePoint& start, double horizon, Measure measure,
                                                      Rng& rng) {
  const RegimePath rp = draw_regimes(m, models, start, horizon, rng);
  const auto z = draw_normals((rp.jumps.size() + 1) * m.assets(), rng);
  return {assemble(m, start, rp, measure, z, 1.0), assemble(m, start, rp, measure, z, -1.0)};
}

void SampleStats::add(double v) {
  ++count;
  const double d = v - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (v - mean);
}

SampleStats SampleStats::merge(const SampleStats& a, const SampleStats& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  SampleStats out;
  out.count = a.count + b.count;
  const double na = static_cast<double>(a.count), nb = static_cast<double>(b.count);
  const double d = b.mean - a.mean;
  out.mean = a.mean + d * nb / (na + nb);
  out.m2 = a.m2 + b.m2 + d * d * na * nb / (na + nb);
  return out;
}

SampleStats SampleStats::reduce(std::span<const SampleStats> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  return merge(reduce(parts.first(half)), reduce(parts.subspan(half)));
}

SampleStats run_batches(std::size_t samples, const McOptions& opts,
                        const std::function<double(Rng&, std::size_t)>& sample) {
  if (opts.batch == 0) throw Error("monte carlo: batch size must be positive");
  const std::size_t batches = (samples + opts.batch - 1) / opts.batch;
  std::vector<SampleStats> parts(batches);
  parallel_for(batches, opts.threads, [&](std::size_t b, int) {
    Rng rng = make_stream(opts.seed, b);
    const std::size_t first = b * opts.batch;
    const std::size_t count = std::min(opts.batch, samples - first);
    SampleStats st;
    for (std::size_t k = 0; k < count; ++k) st.add(sample(rng, first + k));
    parts[b] = st;
  });
  return SampleStats::reduce(parts);
}

McEstimate mc_price(const MarketModel& m, const Claim& claim, std::span<const HazardModel> models,
                    const StatePoint& start, double horizon, const McOptions& opts) {
  if (opts.paths < 100) throw Error("mc_price: at least 100 paths are required");
  if (opts.antithetic && opts.paths % 2 != 0) throw Error("mc_price: antithetic sampling needs an even path count");
  if (claim.assets() != m.assets()) throw Error("mc_price: claim and market disagree on the asset count");
  // samples are path payoffs, or pair averages under antithetics
  const std::size_t samples = opts.antithetic ? opts.paths / 2 : opts.paths;
  const SampleStats all = run_batches(samples, opts, [&](Rng& rng, std::size_t) {
    if (opts.antithetic) {
      const auto [p, q] = simulate_antithetic(m, models, start, horizon, Measure::risk_neutral, rng);
      return 0.5 * (p.discount * claim.payoff(p.terminal) + q.discount * claim.payoff(q.terminal));
    }
    const PathRecord p = simulate_path(m, models, start, horizon, Measure::risk_neutral, rng);
    return p.discount * claim.payoff(p.terminal);
  });
  return McEstimate{all.mean, all.std_error(), opts.paths, all.count};
}

void write_path_csv(std::ostream& os, std::span<const PathRecord> paths) {
  const int n = paths.empty() ? 0 : static_cast<int>(paths.front().terminal.size());
  os << "path,time,component,from,to";
  for (int a = 0; a < n; ++a) os << ",s" << a + 1;
  os << '\n';
  for (std::size_t id = 0; id < paths.size(); ++id) {
    const PathRecord& p = paths[id];
    for (std::size_t k = 0; k < p.regimes.jumps.size(); ++k) {
      const JumpEvent& ev = p.regimes.jumps[k];
      os << id << ',' << format_number(ev.time) << ',' << ev.component << ',' << ev.from + 1 << ',' << ev.to + 1;
      for (int a = 0; a < n; ++a) os << ',' << format_number(p.s_at_jump[k](a));
      os << '\n';
    }
  }
}

}  // namespace smrs
