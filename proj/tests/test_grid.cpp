#include "doctest.h"

#include <cmath>

#include "smrs/grid.hpp"
#include "smrs/stencil.hpp"

using namespace smrs;

namespace {
std::vector<Lattice> lattices2() {
  return {Lattice{std::log(40.0), 0.03, 60}, Lattice{std::log(60.0), 0.025, 70}};
}

// sum over the box of w * g(node)
template <class F>
double moment(const HatWeights& hw, std::span<const Lattice> lats, F g) {
  std::vector<int> b(hw.dim(), 0);
  double acc = 0.0;
  for (std::size_t e = 0; e < hw.box_size(); ++e) {
    Eigen::VectorXd s(hw.dim());
    for (int a = 0; a < hw.dim(); ++a) s(a) = lats[a].node(hw.first[a] + b[a]);
    acc += hw.at(b) * g(s);
    for (int a = hw.dim() - 1; a >= 0; --a) {
      if (++b[a] < hw.count[a]) break;
      b[a] = 0;
    }
  }
  return acc;
}
}  // namespace

TEST_CASE("1d hat moments reproduce constants and linear functions") {
  const Lattice lat{std::log(50.0), 0.02, 100};
  for (double sd : {0.005, 0.05, 0.4}) {
    const double mu = std::log(70.0) + 0.003;
    int first, count;
    node_range(lat, mu, sd, 9.0, first, count);
    std::vector<double> w(count), dw(count);
    hat_moments_1d(lat, mu, sd, first, count, w.data(), dw.data());
    double s0 = 0.0, s1 = 0.0, d0 = 0.0, d1 = 0.0;
    for (int j = 0; j < count; ++j) {
      s0 += w[j];
      s1 += w[j] * lat.node(first + j);
      d0 += dw[j];
      d1 += dw[j] * lat.node(first + j);
    }
    const double mean = std::exp(mu + 0.5 * sd * sd);
    CHECK(s0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s1 == doctest::Approx(mean).epsilon(1e-12));
    CHECK(d0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(d1 == doctest::Approx(mean).epsilon(1e-10));
  }
}

TEST_CASE("correlated weights are exact for bilinear functions") {
  const auto lats = lattices2();
  Eigen::Vector2d mu(std::log(55.0), std::log(80.0));
  Eigen::Matrix2d cov;
  cov << 0.02, 0.008, 0.008, 0.03;
  const HatWeights hw = hat_weights(lats, mu, cov);
  CHECK_FALSE(hw.separable);
  CHECK(moment(hw, lats, [](const Eigen::VectorXd&) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moment(hw, lats, [](const Eigen::VectorXd& s) { return s(0); }) ==
        doctest::Approx(std::exp(mu(0) + 0.01)).epsilon(1e-10));
  CHECK(moment(hw, lats, [](const Eigen::VectorXd& s) { return s(0) * s(1); }) ==
        doctest::Approx(std::exp(mu.sum() + 0.5 * (0.02 + 0.03 + 0.016))).epsilon(1e-10));

  const HatWeights dw = hat_weights(lats, mu, cov, 1);
  CHECK(moment(dw, lats, [](const Eigen::VectorXd& s) { return s(1); }) ==
        doctest::Approx(std::exp(mu(1) + 0.015)).epsilon(1e-9));
}

TEST_CASE("convolution matches direct weights with extension") {
  const auto lats = lattices2();
  Grid g(1.0, 4, 3, 2, lats);
  const EdgeSlopes growth{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.6, 0.4)};
  std::vector<double> field(g.price_count());
  for (std::size_t p = 0; p < field.size(); ++p) {
    const auto s = g.price_at(p);
    field[p] = std::max(0.6 * s(0) + 0.4 * s(1) - 70.0, 0.0);
  }
  Eigen::Vector2d m(-0.01, 0.004);
  for (bool correlated : {false, true}) {
    Eigen::Matrix2d cov;
    cov << 0.01, correlated ? 0.004 : 0.0, correlated ? 0.004 : 0.0, 0.02;
    Eigen::Vector2d origin(lats[0].z0 + m(0), lats[1].z0 + m(1));
    const HatWeights st = hat_weights(lats, origin, cov);
    Convolver conv(g, growth);
    std::vector<double> out(g.price_count());
    conv.apply(st, field, out);
    for (std::size_t p : {std::size_t{0}, std::size_t{777}, g.price_count() - 1}) {
      const auto s = g.price_at(p);
      Eigen::Vector2d mu(std::log(s(0)) + m(0), std::log(s(1)) + m(1));
      const double direct = apply_weights(hat_weights(lats, mu, cov), g, field, growth);
      CHECK(out[p] == doctest::Approx(direct).epsilon(1e-11));
    }
  }
}

TEST_CASE("field interpolation and norms") {
  Grid g(1.0, 4, 5, 2, {Lattice{std::log(50.0), 0.05, 20}});
  CHECK(g.ages_at(0) == 1);
  CHECK(g.ages_at(2) == 3);
  CHECK(g.age_tuples(4) == 25);
  PriceField f(g, 2, EdgeSlopes{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)});
  std::vector<int> q(2);
  for (int i = 0; i <= 4; ++i) {
    for (int x = 0; x < 2; ++x) {
      for (std::size_t af = 0; af < g.age_tuples(i); ++af) {
        g.age_multi(i, af, q);
        auto blk = f.block(i, x, af);
        for (std::size_t p = 0; p < blk.size(); ++p) blk[p] = g.price_at(p)(0) + g.age(q[0]) + 2 * g.age(q[1]);
      }
    }
  }
  const double ages[2] = {0.1, 0.3};
  Eigen::VectorXd s(1);
  s << 61.3;
  CHECK(f.at_slice(4, 1, ages, s) == doctest::Approx(61.3 + 0.7).epsilon(1e-13));
  s << 500.0;  // linear growth past the box
  CHECK(f.at_slice(4, 1, ages, s) == doctest::Approx(500.7).epsilon(1e-13));
  const double clamped[2] = {0.6, 0.0};  // beyond t_2 = 0.5: clamps to 0.5
  s << 61.3;
  CHECK(f.at_slice(2, 0, clamped, s) == doctest::Approx(61.8).epsilon(1e-13));
  CHECK(age_weights(g, 2, 0.6).clamped);
  CHECK(linear_growth_norm(f) > 0.99);
}
