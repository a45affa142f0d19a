#include "doctest.h"

#include <cmath>

#include "smrs/error.hpp"
#include "smrs/market.hpp"

using namespace smrs;

namespace {
Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

MarketModel flat_market(int n, double r, double mu, const Eigen::MatrixXd& sigma) {
  RegimeSpace space({2});
  return MarketModel(space, n, Coefficient::per_regime({TimeSeries(scalar(r))}),
                     Coefficient::per_regime({TimeSeries(Eigen::MatrixXd::Constant(n, 1, mu))}),
                     Coefficient::per_regime({TimeSeries(sigma)}));
}

// Two assets, sigma linear in time between two matrices.
MarketModel ramp_market(double r) {
  RegimeSpace space({2});
  Eigen::MatrixXd s0(2, 2), s1(2, 2);
  s0 << 0.2, 0.0, 0.05, 0.25;
  s1 << 0.35, 0.02, -0.03, 0.15;
  Eigen::MatrixXd mu(2, 1);
  mu << 0.07, 0.03;
  return MarketModel(space, 2, Coefficient::per_regime({TimeSeries(scalar(r))}),
                     Coefficient::per_regime({TimeSeries(mu)}),
                     Coefficient::per_regime({TimeSeries({0.0, 1.0}, {s0, s1})}));
}
}  // namespace

TEST_CASE("regime space enumeration") {
  RegimeSpace sp({2, 3, 2});
  CHECK(sp.size() == 12);
  for (int i = 0; i < sp.size(); ++i) {
    const auto x = sp.tuple(i);
    CHECK(sp.index(x) == i);
    for (int l = 0; l < 3; ++l) {
      for (int j = 0; j < sp.states(l); ++j) {
        auto y = x;
        y[l] = j;
        CHECK(sp.replaced(i, l, j) == sp.index(y));
      }
    }
  }
}

TEST_CASE("factored coefficients combine per component") {
  RegimeSpace sp({2, 2});
  std::vector<std::vector<TimeSeries>> terms{{TimeSeries(scalar(0.01)), TimeSeries(scalar(0.02))},
                                             {TimeSeries(scalar(0.1)), TimeSeries(scalar(0.3))}};
  const auto sum = Coefficient::factored(Coefficient::Combine::sum, terms);
  const auto prod = Coefficient::factored(Coefficient::Combine::product, terms);
  const int x = sp.index(std::vector<int>{1, 1});
  CHECK(sum.at(0.0, x, sp)(0, 0) == doctest::Approx(0.32));
  CHECK(prod.at(0.0, x, sp)(0, 0) == doctest::Approx(0.006));
}

TEST_CASE("constant kernel moments") {
  Eigen::MatrixXd sig(1, 1);
  sig << 0.3;
  const auto m = flat_market(1, 0.04, 0.1, sig);
  Eigen::VectorXd spot(1);
  spot << 50.0;
  const auto k = build_kernel(m, 0.2, 0, 0.5, Measure::risk_neutral, spot);
  CHECK(k.log_mean(0) == doctest::Approx((0.04 - 0.045) * 0.5).epsilon(1e-14));
  CHECK(k.cov(0, 0) == doctest::Approx(0.09 * 0.5).epsilon(1e-14));
  const double norm = kernel_expectation(k, [](const Eigen::VectorXd&) { return 1.0; });
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  const double mean = kernel_expectation(k, [](const Eigen::VectorXd& s) { return s(0); });
  CHECK(mean == doctest::Approx(50.0 * std::exp(0.04 * 0.5)).epsilon(1e-10));
}

TEST_CASE("time varying covariance matches adaptive quadrature") {
  const auto m = ramp_market(0.03);
  Eigen::MatrixXd cov;
  Eigen::VectorXd mean;
  m.integrate(0.1, 1.2, 0, Measure::physical, mean, cov);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double oracle = integrate_adaptive([&](double u) { return m.diffusion(u, 0)(a, b); }, 0.1, 1.0) +
                            integrate_adaptive([&](double u) { return m.diffusion(u, 0)(a, b); }, 1.0, 1.3);
      CHECK(cov(a, b) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("physical mean and covariance of the lognormal") {
  const auto m = ramp_market(0.03);
  Eigen::VectorXd spot(2);
  spot << 80.0, 120.0;
  const auto k = build_kernel(m, 0.3, 0, 0.6, Measure::physical, spot);
  const double m0 = kernel_expectation(k, [](const Eigen::VectorXd& s) { return s(0); });
  CHECK(m0 == doctest::Approx(80.0 * std::exp(0.07 * 0.6)).epsilon(1e-10));
  const double cross = kernel_expectation(k, [](const Eigen::VectorXd& s) { return s(0) * s(1); });
  const double m1 = 120.0 * std::exp(0.03 * 0.6);
  CHECK(cross - m0 * m1 == doctest::Approx(m0 * m1 * std::expm1(k.cov(0, 1))).epsilon(1e-8));
}

TEST_CASE("density derivative matches finite difference") {
  const auto m = ramp_market(0.02);
  Eigen::VectorXd spot(2), price(2);
  spot << 90.0, 110.0;
  price << 95.0, 104.0;
  for (int a = 0; a < 2; ++a) {
    const auto k = build_kernel(m, 0.0, 0, 0.7, Measure::risk_neutral, spot);
    const double h = 1e-5 * spot(a);
    Eigen::VectorXd up = spot, dn = spot;
    up(a) += h;
    dn(a) -= h;
    const double fd = (kernel_density(with_spot(k, up), price) - kernel_density(with_spot(k, dn), price)) / (2 * h);
    CHECK(kernel_density_ds(k, price, a) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("claim expectation reproduces Black-Scholes") {
  Eigen::MatrixXd sig(1, 1);
  sig << 0.2;
  const auto m = flat_market(1, 0.05, 0.05, sig);
  Eigen::VectorXd spot(1);
  spot << 100.0;
  const auto k = build_kernel(m, 0.0, 0, 1.0, Measure::risk_neutral, spot);
  const auto call = Claim::basket_call({1.0}, 100.0);
  CHECK(std::exp(-0.05) * claim_expectation(k, call) == doctest::Approx(10.450583572185565).epsilon(1e-12));
  const double d1 = (0.05 + 0.02) / 0.2;
  CHECK(claim_expectation_ds(k, call, 0) == doctest::Approx(std::exp(0.05) * normal_cdf(d1)).epsilon(1e-12));
}

TEST_CASE("basket claim agrees with brute-force Hermite") {
  const auto m = ramp_market(0.03);
  Eigen::VectorXd spot(2);
  spot << 90.0, 105.0;
  const auto k = build_kernel(m, 0.0, 0, 1.0, Measure::risk_neutral, spot);
  const auto call = Claim::basket_call({0.6, 0.4}, 100.0);
  // nested adaptive quadrature in whitened coordinates
  auto integrand = [&](double u0, double u1) {
    const Eigen::Vector2d z = k.log_mean + k.chol * Eigen::Vector2d(u0, u1);
    const Eigen::Vector2d s(spot(0) * std::exp(z(0)), spot(1) * std::exp(z(1)));
    return call.payoff(s) * normal_pdf(u0) * normal_pdf(u1);
  };
  const double brute = integrate_adaptive(
      [&](double u0) { return integrate_adaptive([&](double u1) { return integrand(u0, u1); }, -12.0, 12.0, 1e-11); },
      -12.0, 12.0, 1e-11);
  CHECK(claim_expectation(k, call) == doctest::Approx(brute).epsilon(1e-8));
  for (int a = 0; a < 2; ++a) {
    const double h = 1e-4 * spot(a);
    Eigen::VectorXd up = spot, dn = spot;
    up(a) += h;
    dn(a) -= h;
    const double fd = (claim_expectation(with_spot(k, up), call) - claim_expectation(with_spot(k, dn), call)) / (2 * h);
    CHECK(claim_expectation_ds(k, call, a) == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("claim envelopes") {
  const auto call = Claim::basket_call({0.5, 0.5}, 100.0);
  CHECK(call.c2() == 100.0);
  CHECK(call.c1()(0) == 0.5);
  CHECK_NOTHROW(call.validate());
  const auto put = Claim::basket_put({1.0}, 80.0);
  CHECK(put.c1()(0) == 0.0);
  CHECK(put.c2() == 80.0);
  const auto lin = Claim::linear({0.3, 0.7});
  CHECK(lin.c2() == 0.0);
  CHECK(lin.payoff(Eigen::Vector2d(10.0, 20.0)) == doctest::Approx(17.0));
  CHECK_THROWS_AS(Claim::piecewise_linear({1.0}, {10.0}, {0.0}, 0.0, -1.0), ValidationError);
  const auto scaled = call.scaled(3.0);
  CHECK(scaled.payoff(Eigen::Vector2d(150.0, 110.0)) == doctest::Approx(3.0 * 30.0));
}

TEST_CASE("singular volatility is rejected") {
  Eigen::MatrixXd sig(2, 2);
  sig << 0.2, 0.2, 0.2, 0.2;
  const auto m = flat_market(2, 0.0, 0.0, sig);
  std::vector<double> times{0.0, 1.0};
  CHECK_THROWS_AS(m.validate(times), ValidationError);
  CHECK_THROWS_AS(build_kernel(m, 0.0, 0, 1.0, Measure::risk_neutral, Eigen::Vector2d(1.0, 1.0)), SingularCovariance);
}
