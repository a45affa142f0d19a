#include "smrs/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "smrs/error.hpp"

namespace smrs {
namespace {

// Golub-Welsch: eigen-decomposition of the Jacobi matrix of the recurrence.
Rule1d golub_welsch(int n, const std::function<double(int)>& offdiag, double mu0) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = offdiag(k);
    jacobi(k - 1, k) = offdiag(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Rule1d rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  // Symmetrize: both weight functions are even.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <class Make>
const Rule1d& cached(std::map<int, Rule1d>& cache, std::mutex& mu, int n, Make make) {
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

}  // namespace

const Rule1d& gauss_legendre(int n) {
  static std::map<int, Rule1d> cache;
  static std::mutex mu;
  if (n < 1) throw Error("gauss_legendre: need at least one node");
  return cached(cache, mu, n, [](int m) {
    return golub_welsch(
        m, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
  });
}

const Rule1d& gauss_hermite(int n) {
  static std::map<int, Rule1d> cache;
  static std::mutex mu;
  if (n < 1) throw Error("gauss_hermite: need at least one node");
  return cached(cache, mu, n, [](int m) {
    return golub_welsch(
        m, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
  });
}

RuleNd tensor_hermite(int dim, int nodes_per_axis) {
  const Rule1d& r = gauss_hermite(nodes_per_axis);
  RuleNd out;
  out.dim = dim;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= r.nodes.size();
  out.nodes.resize(total * dim);
  out.weights.resize(total);
  std::vector<int> idx(dim, 0);
  for (std::size_t q = 0; q < total; ++q) {
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      out.nodes[q * dim + d] = r.nodes[idx[d]];
      w *= r.weights[idx[d]];
    }
    out.weights[q] = w;
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < static_cast<int>(r.nodes.size())) break;
      idx[d] = 0;
    }
  }
  return out;
}

RuleNd sparse_hermite(int dim, int level) {
  // Smolyak: sum over multi-indices i (entries >= 1) with
  // max(dim, L - dim + 1) <= |i| <= L, L = dim + level - 1,
  // coefficient (-1)^(L-|i|) * C(dim-1, L-|i|).
  const int total_level = dim + level - 1;
  auto binom = [](int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
  };
  std::map<std::vector<double>, double> merged;
  std::vector<int> idx(dim, 1);
  while (true) {
    int sum = 0;
    for (int v : idx) sum += v;
    if (sum >= std::max(dim, total_level - dim + 1) && sum <= total_level) {
      const int k = total_level - sum;
      const double coef = ((k % 2) ? -1.0 : 1.0) * binom(dim - 1, k);
      std::vector<const Rule1d*> rules(dim);
      for (int d = 0; d < dim; ++d) rules[d] = &gauss_hermite(2 * idx[d] - 1);
      std::vector<int> pos(dim, 0);
      while (true) {
        std::vector<double> point(dim);
        double w = coef;
        for (int d = 0; d < dim; ++d) {
          point[d] = rules[d]->nodes[pos[d]];
          w *= rules[d]->weights[pos[d]];
        }
        merged[point] += w;
        int d = dim - 1;
        for (; d >= 0; --d) {
          if (++pos[d] < static_cast<int>(rules[d]->nodes.size())) break;
          pos[d] = 0;
        }
        if (d < 0) break;
      }
    }
    int d = dim - 1;
    for (; d >= 0; --d) {
      if (++idx[d] <= total_level) break;
      idx[d] = 1;
    }
    if (d < 0) break;
  }
  RuleNd out;
  out.dim = dim;
  for (const auto& [point, w] : merged) {
    if (w == 0.0) continue;
    out.nodes.insert(out.nodes.end(), point.begin(), point.end());
    out.weights.push_back(w);
  }
  return out;
}

RuleNd normal_rule(int dim, const QuadratureOptions& opts) {
  if (dim > opts.max_tensor_dim) {
    throw DimensionTooLarge("normal quadrature: dimension " + std::to_string(dim) +
                            " exceeds configured maximum " + std::to_string(opts.max_tensor_dim));
  }
  if (dim <= 2) return tensor_hermite(dim, opts.hermite_nodes);
  return sparse_hermite(dim, opts.sparse_level);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_interval(double a, double b) {
  if (b <= a) return 0.0;
  if (a > 0.0) return 0.5 * (std::erfc(a / std::numbers::sqrt2) - std::erfc(b / std::numbers::sqrt2));
  return 0.5 * (std::erfc(-b / std::numbers::sqrt2) - std::erfc(-a / std::numbers::sqrt2));
}

}  // namespace smrs
