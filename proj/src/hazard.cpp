#include "smrs/hazard.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "smrs/error.hpp"

namespace smrs {

std::string to_string(HazardFamily f) {
  switch (f) {
    case HazardFamily::constant: return "constant";
    case HazardFamily::affine: return "affine";
    case HazardFamily::weibull: return "weibull";
    case HazardFamily::tabulated: return "tabulated";
  }
  return "?";
}

RateFunction RateFunction::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("constant hazard must be positive");
  RateFunction f;
  f.family_ = HazardFamily::constant;
  f.params_ = {c};
  return f;
}

RateFunction RateFunction::affine(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !(a + b > 0.0)) {
    throw ValidationError("affine hazard needs a >= 0, b >= 0, a + b > 0");
  }
  RateFunction f;
  f.family_ = HazardFamily::affine;
  f.params_ = {a, b};
  return f;
}

RateFunction RateFunction::weibull(double c, double kappa) {
  if (!(c > 0.0)) throw ValidationError("weibull hazard needs c > 0");
  if (!(kappa == 1.0 || kappa >= 2.0)) {
    throw ValidationError("weibull hazard needs kappa == 1 or kappa >= 2 (C1 rate)");
  }
  RateFunction f;
  f.family_ = HazardFamily::weibull;
  f.params_ = {c, kappa};
  return f;
}

RateFunction RateFunction::tabulated(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() < 2 || knots.size() != values.size()) {
    throw ValidationError("tabulated hazard needs >= 2 (knot, value) pairs");
  }
  if (knots.front() != 0.0) throw ValidationError("tabulated hazard: first knot must be 0");
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k] > knots[k - 1])) {
      throw ValidationError("tabulated hazard: knots must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!(v > 0.0)) throw ValidationError("tabulated hazard: values must be positive");
  }
  RateFunction f;
  f.family_ = HazardFamily::tabulated;
  f.knots_ = std::move(knots);
  f.values_ = std::move(values);
  f.build_tabulated();
  return f;
}

void RateFunction::build_tabulated() {
  const std::size_t m = knots_.size();
  std::vector<double> h(m - 1), secant(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    h[k] = knots_[k + 1] - knots_[k];
    secant[k] = (values_[k + 1] - values_[k]) / h[k];
  }
  // Fritsch-Butland slopes; zero at both ends so the constant extension is C1.
  slopes_.assign(m, 0.0);
  for (std::size_t k = 1; k + 1 < m; ++k) {
    if (secant[k - 1] * secant[k] <= 0.0) continue;
    slopes_[k] = 3.0 * (h[k - 1] + h[k]) /
                 ((2.0 * h[k] + h[k - 1]) / secant[k - 1] + (h[k] + 2.0 * h[k - 1]) / secant[k]);
  }
  cumulative_.assign(m, 0.0);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    cumulative_[k + 1] = cumulative_[k] + h[k] * (values_[k] + values_[k + 1]) / 2.0 +
                         h[k] * h[k] * (slopes_[k] - slopes_[k + 1]) / 12.0;
  }
}

double RateFunction::rate(double age) const {
  switch (family_) {
    case HazardFamily::constant: return params_[0];
    case HazardFamily::affine: return params_[0] + params_[1] * age;
    case HazardFamily::weibull:
      return params_[1] == 1.0 ? params_[0] : params_[0] * std::pow(age, params_[1] - 1.0);
    case HazardFamily::tabulated: {
      if (age >= knots_.back()) return values_.back();
      if (age <= 0.0) return values_.front();
      const auto k = static_cast<std::size_t>(
          std::upper_bound(knots_.begin(), knots_.end(), age) - knots_.begin() - 1);
      const double h = knots_[k + 1] - knots_[k];
      const double u = (age - knots_[k]) / h;
      const double u2 = u * u, u3 = u2 * u;
      return values_[k] * (2 * u3 - 3 * u2 + 1) + h * slopes_[k] * (u3 - 2 * u2 + u) +
             values_[k + 1] * (-2 * u3 + 3 * u2) + h * slopes_[k + 1] * (u3 - u2);
    }
  }
  return 0.0;
}

double RateFunction::integral(double age) const {
  if (age <= 0.0) return 0.0;
  switch (family_) {
    case HazardFamily::constant: return params_[0] * age;
    case HazardFamily::affine: return params_[0] * age + 0.5 * params_[1] * age * age;
    case HazardFamily::weibull: return params_[0] * std::pow(age, params_[1]) / params_[1];
    case HazardFamily::tabulated: {
      if (age >= knots_.back()) return cumulative_.back() + values_.back() * (age - knots_.back());
      const auto k = static_cast<std::size_t>(
          std::upper_bound(knots_.begin(), knots_.end(), age) - knots_.begin() - 1);
      const double h = knots_[k + 1] - knots_[k];
      const double u = (age - knots_[k]) / h;
      const double u2 = u * u, u3 = u2 * u, u4 = u3 * u;
      return cumulative_[k] +
             h * (values_[k] * (u4 / 2 - u3 + u) + h * slopes_[k] * (u4 / 4 - 2 * u3 / 3 + u2 / 2) +
                  values_[k + 1] * (-u4 / 2 + u3) + h * slopes_[k + 1] * (u4 / 4 - u3 / 3));
    }
  }
  return 0.0;
}

RateFunction RateFunction::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("hazard scale factor must be positive");
  RateFunction f = *this;
  switch (family_) {
    case HazardFamily::constant: f.params_[0] *= factor; break;
    case HazardFamily::affine: f.params_[0] *= factor; f.params_[1] *= factor; break;
    case HazardFamily::weibull: f.params_[0] *= factor; break;
    case HazardFamily::tabulated:
      for (double& v : f.values_) v *= factor;
      f.build_tabulated();
      break;
  }
  return f;
}

HazardModel::HazardModel(int states, std::vector<std::vector<std::optional<RateFunction>>> rates)
    : states_(states), rates_(std::move(rates)) {
  validate();
}

void HazardModel::validate() const {
  if (states_ < 1) throw ValidationError("hazard model needs at least one state");
  if (static_cast<int>(rates_.size()) != states_) {
    throw ValidationError("hazard model: rate table must be states x states");
  }
  for (int i = 0; i < states_; ++i) {
    if (static_cast<int>(rates_[i].size()) != states_) {
      throw ValidationError("hazard model: rate table must be states x states");
    }
    if (rates_[i][i].has_value()) throw ValidationError("hazard model: diagonal rate given");
  }
  if (states_ == 1) {
    throw ValidationError("hazard model: a single state has no exit rate (holding time would be infinite)");
  }
  for (int i = 0; i < states_; ++i) {
    bool any = false;
    for (int j = 0; j < states_; ++j) any = any || rates_[i][j].has_value();
    if (!any) {
      throw ValidationError("hazard model: state " + std::to_string(i + 1) + " has no exit rate");
    }
  }
  // Irreducibility of the embedded chain, by reachability on the support pattern.
  for (int start = 0; start < states_; ++start) {
    std::vector<bool> seen(states_, false);
    std::vector<int> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < states_; ++j) {
        if (rates_[i][j].has_value() && !seen[j]) {
          seen[j] = true;
          stack.push_back(j);
        }
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw ValidationError("hazard model: embedded transition matrix is not irreducible");
    }
  }
}

double HazardModel::rate(int i, int j, double age) const {
  return rates_[i][j] ? rates_[i][j]->rate(age) : 0.0;
}

double HazardModel::exit_rate(int i, double age) const {
  double total = 0.0;
  for (const auto& f : rates_[i]) {
    if (f) total += f->rate(age);
  }
  return total;
}

double HazardModel::cumulative_hazard(int i, double age) const {
  double total = 0.0;
  for (const auto& f : rates_[i]) {
    if (f) total += f->integral(age);
  }
  return total;
}

double HazardModel::holding_cdf(int i, double age) const {
  return -std::expm1(-cumulative_hazard(i, age));
}

double HazardModel::holding_pdf(int i, double age) const {
  return exit_rate(i, age) * std::exp(-cumulative_hazard(i, age));
}

double HazardModel::residual_holding_cdf(int i, double age, double s) const {
  return -std::expm1(-(cumulative_hazard(i, age + s) - cumulative_hazard(i, age)));
}

std::vector<double> HazardModel::transition_probs(int i, double age) const {
  std::vector<double> p(states_, 0.0);
  double total = 0.0;
  for (int j = 0; j < states_; ++j) {
    p[j] = rate(i, j, age);
    total += p[j];
  }
  if (!(total > 0.0)) {
    // Only possible at age 0 for weibull/affine rates vanishing there: use the
    // limit of the ratio as age -> 0+.
    return transition_probs(i, 1e-12);
  }
  for (double& v : p) v /= total;
  return p;
}

double HazardModel::invert_cumulative(int i, double age, double e) const {
  if (e <= 0.0) return 0.0;
  // Closed forms: all rates polynomial of degree <= 1, or all weibull sharing kappa.
  bool polynomial = true;
  bool common_kappa = true;
  double kappa = -1.0, a = 0.0, b = 0.0, c = 0.0;
  for (const auto& f : rates_[i]) {
    if (!f) continue;
    switch (f->family()) {
      case HazardFamily::constant:
        a += f->params()[0];
        c += f->params()[0];
        if (kappa < 0) kappa = 1.0;
        common_kappa = common_kappa && kappa == 1.0;
        break;
      case HazardFamily::affine:
        a += f->params()[0];
        b += f->params()[1];
        common_kappa = false;
        break;
      case HazardFamily::weibull:
        if (kappa < 0) kappa = f->params()[1];
        common_kappa = common_kappa && kappa == f->params()[1];
        polynomial = polynomial && f->params()[1] == 1.0;
        if (f->params()[1] == 1.0) a += f->params()[0];
        c += f->params()[0];
        break;
      case HazardFamily::tabulated:
        polynomial = false;
        common_kappa = false;
        break;
    }
  }
  if (polynomial) {
    // (b/2) tau^2 + (a + b age) tau - e = 0, stable root.
    const double lin = a + b * age;
    return 2.0 * e / (lin + std::sqrt(lin * lin + 2.0 * b * e));
  }
  if (common_kappa) {
    // c (age + tau)^kappa / kappa = c age^kappa / kappa + e
    return std::pow(std::pow(age, kappa) + kappa * e / c, 1.0 / kappa) - age;
  }
  const double base = cumulative_hazard(i, age);
  auto gap = [&](double tau) { return cumulative_hazard(i, age + tau) - base - e; };
  double hi = 1.0;
  int doublings = 0;
  while (gap(hi) < 0.0) {
    hi *= 2.0;
    if (++doublings > 200) throw RootFindFailure("cumulative hazard inversion: cannot bracket root");
  }
  std::uintmax_t iters = 200;
  auto tol = [](double lo, double up) { return std::abs(up - lo) <= 1e-12 * std::max(1.0, std::abs(up)); };
  try {
    const auto [lo, up] = boost::math::tools::toms748_solve(gap, 0.0, hi, -e, gap(hi), tol, iters);
    if (iters >= 200) throw RootFindFailure("cumulative hazard inversion did not converge");
    return 0.5 * (lo + up);
  } catch (const std::exception& ex) {
    if (dynamic_cast<const RootFindFailure*>(&ex)) throw;
    throw RootFindFailure(std::string("cumulative hazard inversion: ") + ex.what());
  }
}

HazardModel HazardModel::scaled(double factor) const {
  auto rates = rates_;
  for (auto& row : rates) {
    for (auto& f : row) {
      if (f) f = f->scaled(factor);
    }
  }
  return HazardModel(states_, std::move(rates));
}

double HazardModel::sup_distance(const HazardModel& other, int i, int j,
                                 const std::vector<double>& ages) const {
  double d = 0.0;
  for (double y : ages) d = std::max(d, std::abs(rate(i, j, y) - other.rate(i, j, y)));
  return d;
}

}  // namespace smrs
