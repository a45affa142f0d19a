#include "smrs/market.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "smrs/error.hpp"

namespace smrs {

// ---------------------------------------------------------------- RegimeSpace

RegimeSpace::RegimeSpace(std::vector<int> states_per_component) : radix_(std::move(states_per_component)) {
  if (radix_.empty()) throw ValidationError("regime space needs at least one component");
  stride_.assign(radix_.size(), 1);
  for (int l = static_cast<int>(radix_.size()) - 1; l >= 0; --l) {
    if (radix_[l] < 1) throw ValidationError("regime space: component with no states");
    stride_[l] = size_;
    size_ *= radix_[l];
  }
}

int RegimeSpace::index(std::span<const int> tuple) const {
  int idx = 0;
  for (std::size_t l = 0; l < radix_.size(); ++l) idx += tuple[l] * stride_[l];
  return idx;
}

std::vector<int> RegimeSpace::tuple(int index) const {
  std::vector<int> x(radix_.size());
  for (std::size_t l = 0; l < radix_.size(); ++l) x[l] = (index / stride_[l]) % radix_[l];
  return x;
}

int RegimeSpace::component_state(int index, int l) const { return (index / stride_[l]) % radix_[l]; }

int RegimeSpace::replaced(int index, int l, int j) const {
  return index + (j - component_state(index, l)) * stride_[l];
}

// ---------------------------------------------------------------- TimeSeries

TimeSeries::TimeSeries(Eigen::MatrixXd constant) : values_{std::move(constant)} {}

TimeSeries::TimeSeries(std::vector<double> knots, std::vector<Eigen::MatrixXd> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size() || knots_.empty()) {
    throw ValidationError("time series: knots and values must have equal, non-zero length");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) throw ValidationError("time series: knots must be strictly increasing");
    if (values_[k].rows() != values_[0].rows() || values_[k].cols() != values_[0].cols()) {
      throw ValidationError("time series: inconsistent value shapes");
    }
  }
  if (knots_.size() == 1) knots_.clear();
}

Eigen::MatrixXd TimeSeries::at(double t) const {
  if (knots_.empty()) return values_.front();
  if (t <= knots_.front()) return values_.front();
  if (t >= knots_.back()) return values_.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin() - 1);
  const double w = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
  return (1.0 - w) * values_[k] + w * values_[k + 1];
}

// ---------------------------------------------------------------- Coefficient

Coefficient Coefficient::per_regime(std::vector<TimeSeries> series) {
  if (series.empty()) throw ValidationError("coefficient: no values");
  Coefficient c;
  c.series_ = std::move(series);
  return c;
}

Coefficient Coefficient::factored(Combine rule, std::vector<std::vector<TimeSeries>> terms) {
  if (terms.empty()) throw ValidationError("coefficient: no factored terms");
  Coefficient c;
  c.factored_ = true;
  c.rule_ = rule;
  c.terms_ = std::move(terms);
  return c;
}

Eigen::MatrixXd Coefficient::at(double t, int regime, const RegimeSpace& space) const {
  if (!factored_) return series_.size() == 1 ? series_[0].at(t) : series_.at(regime).at(t);
  Eigen::MatrixXd out;
  for (int l = 0; l < space.components(); ++l) {
    const Eigen::MatrixXd term = terms_.at(l).at(space.component_state(regime, l)).at(t);
    if (l == 0) {
      out = term;
    } else if (rule_ == Combine::sum) {
      out += term;
    } else {
      out = out.cwiseProduct(term);
    }
  }
  return out;
}

std::vector<double> Coefficient::breakpoints(int regime, const RegimeSpace& space) const {
  std::vector<double> out;
  if (!factored_) {
    const auto& k = (series_.size() == 1 ? series_[0] : series_.at(regime)).knots();
    out.assign(k.begin(), k.end());
  } else {
    for (int l = 0; l < space.components(); ++l) {
      const auto& k = terms_.at(l).at(space.component_state(regime, l)).knots();
      out.insert(out.end(), k.begin(), k.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

// ---------------------------------------------------------------- MarketModel

MarketModel::MarketModel(RegimeSpace space, int assets, Coefficient rate, Coefficient drift, Coefficient vol,
                         int time_nodes)
    : space_(std::move(space)),
      assets_(assets),
      rate_(std::move(rate)),
      drift_(std::move(drift)),
      vol_(std::move(vol)),
      time_nodes_(time_nodes) {
  if (assets_ < 1) throw ValidationError("market: need at least one asset");
  if (!rate_.is_factored() && rate_.series().size() != 1 &&
      static_cast<int>(rate_.series().size()) != space_.size()) {
    throw ValidationError("market: r table does not cover every regime tuple");
  }
  rates_.resize(space_.size());
  for (int x = 0; x < space_.size(); ++x) {
    const Eigen::MatrixXd r = rate_.at(0.0, x, space_);
    if (r.size() != 1) throw ValidationError("market: r must be scalar");
    if (!(r(0, 0) >= 0.0)) throw ValidationError("market: r(x) must be >= 0");
    rates_[x] = r(0, 0);
    const Eigen::MatrixXd mu = drift_.at(0.0, x, space_);
    if (mu.size() != assets_) throw ValidationError("market: mu must have one entry per asset");
    const Eigen::MatrixXd sig = vol_.at(0.0, x, space_);
    if (sig.rows() != assets_ || sig.cols() != assets_) throw ValidationError("market: sigma must be n x n");
  }
}

Eigen::VectorXd MarketModel::drift(double t, int regime) const {
  return drift_.at(t, regime, space_).reshaped();
}

Eigen::MatrixXd MarketModel::vol(double t, int regime) const { return vol_.at(t, regime, space_); }

Eigen::MatrixXd MarketModel::diffusion(double t, int regime) const {
  const Eigen::MatrixXd s = vol(t, regime);
  return s * s.transpose();
}

void MarketModel::integrate(double t, double v, int regime, Measure measure, Eigen::VectorXd& log_mean,
                            Eigen::MatrixXd& cov) const {
  std::vector<double> cuts{t};
  auto add = [&](const std::vector<double>& bps) {
    for (double b : bps) {
      if (b > t && b < t + v) cuts.push_back(b);
    }
  };
  const auto vol_bps = vol_.breakpoints(regime, space_);
  const auto drift_bps = drift_.breakpoints(regime, space_);
  add(vol_bps);
  if (measure == Measure::physical) add(drift_bps);
  cuts.push_back(t + v);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  cov = Eigen::MatrixXd::Zero(assets_, assets_);
  Eigen::VectorXd drift_int = Eigen::VectorXd::Zero(assets_);
  const bool constant_vol = vol_bps.empty();
  const bool constant_drift = measure == Measure::risk_neutral || drift_bps.empty();
  if (constant_vol && constant_drift) {
    cov = diffusion(t, regime) * v;
    drift_int = measure == Measure::physical ? Eigen::VectorXd(drift(t, regime) * v)
                                             : Eigen::VectorXd::Constant(assets_, rates_[regime] * v);
  } else {
    const Rule1d& gl = gauss_legendre(time_nodes_);
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double a = cuts[p], b = cuts[p + 1];
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double u = mid + half * gl.nodes[q];
        const double w = half * gl.weights[q];
        cov += w * diffusion(u, regime);
        if (measure == Measure::physical) drift_int += w * drift(u, regime);
      }
    }
    if (measure == Measure::risk_neutral) drift_int = Eigen::VectorXd::Constant(assets_, rates_[regime] * v);
  }
  log_mean = drift_int - 0.5 * cov.diagonal();
}

void MarketModel::validate(std::span<const double> times) const {
  for (int x = 0; x < space_.size(); ++x) {
    for (double t : times) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(vol(t, x));
      const auto& sv = svd.singularValues();
      const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
      if (!(cond < 1e12)) {
        const auto tup = space_.tuple(x);
        std::string name;
        for (int s : tup) name += (name.empty() ? "" : ",") + std::to_string(s + 1);
        throw ValidationError("market: sigma(t=" + std::to_string(t) + ", x=(" + name +
                              ")) is not invertible (condition number >= 1e12)");
      }
    }
  }
}

// ---------------------------------------------------------------- Claim

namespace {
Eigen::VectorXd to_vector(const std::vector<double>& w) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) v(static_cast<Eigen::Index>(i)) = w[i];
  return v;
}
}  // namespace

Claim Claim::basket_call(std::vector<double> weights, double strike) {
  if (!(strike >= 0.0)) throw ValidationError("claim: strike must be >= 0");
  Claim c;
  c.kind_ = Kind::basket_call;
  c.weights_ = to_vector(weights);
  c.strike_ = strike;
  c.kinks_ = {strike};
  c.kink_values_ = {0.0};
  c.slopes_ = {0.0, 1.0};
  c.finish();
  return c;
}

Claim Claim::basket_put(std::vector<double> weights, double strike) {
  if (!(strike >= 0.0)) throw ValidationError("claim: strike must be >= 0");
  Claim c;
  c.kind_ = Kind::basket_put;
  c.weights_ = to_vector(weights);
  c.strike_ = strike;
  c.kinks_ = {strike};
  c.kink_values_ = {0.0};
  c.slopes_ = {-1.0, 0.0};
  c.finish();
  return c;
}

Claim Claim::linear(std::vector<double> weights) {
  Claim c;
  c.kind_ = Kind::linear;
  c.weights_ = to_vector(weights);
  c.slopes_ = {1.0};
  c.finish();
  return c;
}

Claim Claim::piecewise_linear(std::vector<double> weights, std::vector<double> knots, std::vector<double> values,
                              double left_slope, double right_slope) {
  if (knots.empty() || knots.size() != values.size()) {
    throw ValidationError("claim: piecewise-linear profile needs matching, non-empty knots and values");
  }
  Claim c;
  c.kind_ = Kind::piecewise_linear;
  c.weights_ = to_vector(weights);
  c.kinks_ = std::move(knots);
  c.kink_values_ = std::move(values);
  c.slopes_.push_back(left_slope);
  for (std::size_t k = 1; k < c.kinks_.size(); ++k) {
    if (!(c.kinks_[k] > c.kinks_[k - 1])) throw ValidationError("claim: profile knots must be strictly increasing");
    c.slopes_.push_back((c.kink_values_[k] - c.kink_values_[k - 1]) / (c.kinks_[k] - c.kinks_[k - 1]));
  }
  c.slopes_.push_back(right_slope);
  c.finish();
  return c;
}

std::string Claim::kind_name() const {
  switch (kind_) {
    case Kind::basket_call: return "basket-call";
    case Kind::basket_put: return "basket-put";
    case Kind::linear: return "linear";
    case Kind::piecewise_linear: return "piecewise-linear";
  }
  return "?";
}

double Claim::profile(double u) const {
  if (kinks_.empty()) return offset_ + slopes_[0] * u;
  if (u <= kinks_.front()) return kink_values_.front() + slopes_.front() * (u - kinks_.front());
  if (u >= kinks_.back()) return kink_values_.back() + slopes_.back() * (u - kinks_.back());
  const auto k = static_cast<std::size_t>(std::upper_bound(kinks_.begin(), kinks_.end(), u) - kinks_.begin() - 1);
  return kink_values_[k] + slopes_[k + 1] * (u - kinks_[k]);
}

std::size_t Claim::piece_of(double u) const {
  return static_cast<std::size_t>(std::upper_bound(kinks_.begin(), kinks_.end(), u) - kinks_.begin());
}

double Claim::intercept_on_piece(std::size_t piece) const {
  if (kinks_.empty()) return offset_;
  const std::size_t k = piece == 0 ? 0 : piece - 1;
  return kink_values_[k] - slopes_[piece] * kinks_[k];
}

double Claim::payoff(std::span<const double> s) const {
  double u = 0.0;
  for (Eigen::Index a = 0; a < weights_.size(); ++a) u += weights_(a) * s[static_cast<std::size_t>(a)];
  return profile(u);
}

double Claim::payoff(const Eigen::VectorXd& s) const { return profile(weights_.dot(s)); }

void Claim::finish() {
  if (weights_.size() < 1) throw ValidationError("claim: needs at least one weight");
  if (weights_.cwiseAbs().maxCoeff() == 0.0) throw ValidationError("claim: weights are all zero");
  const bool has_pos = (weights_.array() > 0.0).any();
  const bool has_neg = (weights_.array() < 0.0).any();
  // Range of the basket value u = c . s over s >= 0.
  const double lo = has_neg ? -INFINITY : 0.0;
  const double hi = has_pos ? INFINITY : 0.0;

  double slope_at_inf;
  if (hi == INFINITY && lo == -INFINITY) {
    if (slopes_.front() != slopes_.back()) {
      throw ValidationError("claim: mixed-sign weights need equal end slopes for a linear envelope");
    }
    slope_at_inf = slopes_.back();
  } else {
    slope_at_inf = hi == INFINITY ? slopes_.back() : slopes_.front();
  }
  c1_ = slope_at_inf * weights_;
  c0_ = (lo == -INFINITY ? slopes_.front() : slopes_[piece_of(0.0)]) * weights_;

  // K(s) - c1 . s = f(u) - slope u is piecewise linear and constant on the
  // unbounded end, so its sup sits at u = 0 or a kink inside the range.
  auto gap = [&](double u) { return std::abs(profile(u) - slope_at_inf * u); };
  c2_ = std::isfinite(lo) || std::isfinite(hi) ? gap(0.0) : 0.0;
  for (double k : kinks_) {
    if (k >= lo && k <= hi) c2_ = std::max(c2_, gap(k));
  }
  if (lo == -INFINITY && hi == INFINITY && kinks_.empty()) c2_ = std::abs(offset_);
  if (lo == -INFINITY && hi == INFINITY && !kinks_.empty()) {
    c2_ = std::max(gap(kinks_.front()), gap(kinks_.back()));
    for (double k : kinks_) c2_ = std::max(c2_, gap(k));
  }

  double max_slope = 0.0;
  for (double s : slopes_) max_slope = std::max(max_slope, std::abs(s));
  lipschitz_ = max_slope * weights_.cwiseAbs().maxCoeff();

  // Nonnegativity: f >= 0 on the range. Check the asymptotic slopes and the
  // values at the range ends and at kinks.
  const double eps = 1e-12 * (1.0 + std::abs(strike_));
  if (hi == INFINITY && slopes_.back() < 0.0) throw ValidationError("claim: payoff turns negative for large basket");
  if (lo == -INFINITY && slopes_.front() > 0.0) throw ValidationError("claim: payoff turns negative for small basket");
  if ((std::isfinite(lo) || std::isfinite(hi)) && profile(0.0) < -eps) {
    throw ValidationError("claim: payoff negative at s = 0");
  }
  for (double k : kinks_) {
    if (k >= lo && k <= hi && profile(k) < -eps) throw ValidationError("claim: payoff negative at a kink");
  }
}

Claim Claim::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("claim scale factor must be positive");
  Claim c = *this;
  c.kind_ = kinks_.empty() ? Kind::linear : Kind::piecewise_linear;
  for (double& v : c.kink_values_) v *= factor;
  for (double& s : c.slopes_) s *= factor;
  c.offset_ *= factor;
  c.finish();
  return c;
}

void Claim::validate(std::uint64_t seed, int samples) const {
  std::mt19937_64 rng(seed);
  const double scale = std::max(1.0, strike_) / std::max(1e-12, weights_.cwiseAbs().sum());
  std::normal_distribution<double> normal(0.0, 1.5);
  Eigen::VectorXd s(weights_.size());
  for (int k = 0; k < samples; ++k) {
    for (Eigen::Index a = 0; a < s.size(); ++a) s(a) = scale * std::exp(normal(rng));
    const double value = payoff(s);
    if (value < -1e-9 * (1.0 + std::abs(value))) throw ValidationError("claim: payoff negative at a sampled point");
    if (std::abs(value - c1_.dot(s)) > c2_ * (1.0 + 1e-12) + 1e-9) {
      throw ValidationError("claim: |K(s) - c1 . s| <= c2 violated at a sampled point");
    }
  }
}

// ---------------------------------------------------------------- Kernel

LognormalKernel build_kernel(const MarketModel& m, double t, int regime, double v, Measure measure,
                             const Eigen::VectorXd& spot) {
  if (!(v > 0.0)) throw Error("build_kernel: elapsed time must be positive");
  LognormalKernel k;
  k.elapsed = v;
  m.integrate(t, v, regime, measure, k.log_mean, k.cov);
  Eigen::LLT<Eigen::MatrixXd> llt(k.cov);
  k.chol = llt.matrixL();
  const double scale = k.cov.diagonal().maxCoeff();
  if (llt.info() != Eigen::Success || !(k.chol.diagonal().array().square().minCoeff() > 1e-13 * scale)) {
    throw SingularCovariance("build_kernel: integrated covariance is not positive definite");
  }
  const int n = static_cast<int>(k.cov.rows());
  k.cov_inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  k.log_det = 2.0 * k.chol.diagonal().array().log().sum();
  k.spot = spot;
  return k;
}

LognormalKernel with_spot(LognormalKernel kern, const Eigen::VectorXd& spot) {
  kern.spot = spot;
  return kern;
}

double kernel_density(const LognormalKernel& k, const Eigen::VectorXd& price) {
  const int n = k.dim();
  if ((price.array() <= 0.0).any()) return 0.0;
  const Eigen::VectorXd d = (price.array() / k.spot.array()).log().matrix() - k.log_mean;
  const double quad = d.dot(k.cov_inv * d);
  const double log_norm = 0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * k.log_det + price.array().log().sum();
  return std::exp(-0.5 * quad - log_norm);
}

double kernel_density_ds(const LognormalKernel& k, const Eigen::VectorXd& price, int m) {
  const Eigen::VectorXd d = (price.array() / k.spot.array()).log().matrix() - k.log_mean;
  return kernel_density(k, price) * (k.cov_inv.row(m).dot(d)) / k.spot(m);
}

double kernel_expectation(const LognormalKernel& k, const std::function<double(const Eigen::VectorXd&)>& g,
                          const QuadratureOptions& opts) {
  const int n = k.dim();
  const RuleNd rule = normal_rule(n, opts);
  Eigen::VectorXd u(n), price(n);
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto pt = rule.point(q);
    for (int a = 0; a < n; ++a) u(a) = pt[a];
    price = k.spot.array() * (k.log_mean + k.chol * u).array().exp();
    acc += rule.weights[q] * g(price);
  }
  return acc;
}

namespace {

// Shared driver: outer Gauss-Hermite over the first n-1 whitened axes, closed
// form along the last one. `score_row` (may be empty) selects the score
// weight (L^{-T} u)_m in permuted coordinates.
double claim_integral(const LognormalKernel& k, const Claim& claim, int score_index, const QuadratureOptions& opts) {
  const int n = k.dim();
  // Permute so the asset with the largest |weight| is last.
  std::vector<int> perm(n);
  for (int a = 0; a < n; ++a) perm[a] = a;
  int last = 0;
  for (int a = 1; a < n; ++a) {
    if (std::abs(claim.weights()(a)) > std::abs(claim.weights()(last))) last = a;
  }
  std::swap(perm[last], perm[n - 1]);
  Eigen::MatrixXd cov(n, n);
  Eigen::VectorXd mean(n), spot(n), c(n);
  for (int a = 0; a < n; ++a) {
    mean(a) = k.log_mean(perm[a]);
    spot(a) = k.spot(perm[a]);
    c(a) = claim.weights()(perm[a]);
    for (int b = 0; b < n; ++b) cov(a, b) = k.cov(perm[a], perm[b]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw SingularCovariance("claim_expectation: covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::VectorXd score_coef;
  if (score_index >= 0) {
    int pm = 0;
    for (int a = 0; a < n; ++a) {
      if (perm[a] == score_index) pm = a;
    }
    // row pm of L^{-T}
    const Eigen::MatrixXd linv_t = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
    score_coef = linv_t.row(pm).transpose();
  }

  const RuleNd outer = normal_rule(n - 1, opts);
  const double lam = L(n - 1, n - 1);
  const double growth = std::exp(0.5 * lam * lam);
  const auto& kinks = claim.kinks();
  double total = 0.0;
  std::vector<double> cuts;
  for (std::size_t q = 0; q < outer.size(); ++q) {
    const auto u = outer.point(q);
    double A = 0.0;
    double last_shift = mean(n - 1);
    double c0 = 0.0;
    for (int a = 0; a < n - 1; ++a) {
      double z = mean(a);
      for (int b = 0; b <= a; ++b) z += L(a, b) * u[b];
      A += c(a) * spot(a) * std::exp(z);
      last_shift += L(n - 1, a) * u[a];
      if (score_index >= 0) c0 += score_coef(a) * u[a];
    }
    const double cn = score_index >= 0 ? score_coef(n - 1) : 0.0;
    const double B = c(n - 1) * spot(n - 1) * std::exp(last_shift);
    // breakpoints of the last axis where the basket crosses a kink
    cuts.clear();
    for (double kink : kinks) {
      const double ratio = (kink - A) / B;
      if (ratio > 0.0) cuts.push_back(std::log(ratio) / lam);
    }
    std::sort(cuts.begin(), cuts.end());
    double inner = 0.0;
    for (std::size_t p = 0; p <= cuts.size(); ++p) {
      const double a = p == 0 ? -INFINITY : cuts[p - 1];
      const double b = p == cuts.size() ? INFINITY : cuts[p];
      if (!(b > a)) continue;
      // pick a probe point inside (a, b) to read the active linear piece
      double probe;
      if (std::isfinite(a) && std::isfinite(b)) probe = 0.5 * (a + b);
      else if (std::isfinite(a)) probe = a + 1.0;
      else if (std::isfinite(b)) probe = b - 1.0;
      else probe = 0.0;
      // f(u) = alpha + beta u on this piece
      const std::size_t piece = claim.piece_of(A + B * std::exp(lam * probe));
      const double beta = claim.slope_on_piece(piece);
      const double alpha = claim.intercept_on_piece(piece);
      const double p0 = normal_interval(a, b);
      const double p1 = normal_interval(a - lam, b - lam);
      if (score_index < 0) {
        inner += (alpha + beta * A) * p0 + beta * B * growth * p1;
      } else {
        const double pdf_a = std::isfinite(a) ? normal_pdf(a) : 0.0;
        const double pdf_b = std::isfinite(b) ? normal_pdf(b) : 0.0;
        const double pdf_a1 = std::isfinite(a) ? normal_pdf(a - lam) : 0.0;
        const double pdf_b1 = std::isfinite(b) ? normal_pdf(b - lam) : 0.0;
        inner += (alpha + beta * A) * (c0 * p0 + cn * (pdf_a - pdf_b)) +
                 beta * B * growth * (c0 * p1 + cn * ((pdf_a1 - pdf_b1) + lam * p1));
      }
    }
    total += outer.weights[q] * inner;
  }
  if (score_index >= 0) total /= k.spot(score_index);
  return total;
}

}  // namespace

double claim_expectation(const LognormalKernel& k, const Claim& claim, const QuadratureOptions& opts) {
  return claim_integral(k, claim, -1, opts);
}

double claim_expectation_ds(const LognormalKernel& k, const Claim& claim, int m, const QuadratureOptions& opts) {
  return claim_integral(k, claim, m, opts);
}

}  // namespace smrs
