#pragma once

#include <functional>
#include <span>
#include <vector>

namespace smrs {

/// One-dimensional rule: nodes and weights.
struct Rule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]; cached per size, thread-safe.
const Rule1d& gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight (weights sum to 1).
const Rule1d& gauss_hermite(int n);

/// Multi-dimensional rule for the standard normal in `dim` dimensions.
/// `nodes` is row-major (point-major) with `dim` entries per point.
struct RuleNd {
  int dim = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  std::span<const double> point(std::size_t q) const {
    return {nodes.data() + q * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

RuleNd tensor_hermite(int dim, int nodes_per_axis);

/// Smolyak combination of Gauss-Hermite rules of sizes 1, 3, 5, ...
/// `level` >= 1 counts refinement levels above the one-point rule.
RuleNd sparse_hermite(int dim, int level);

struct QuadratureOptions {
  int hermite_nodes = 32;   // per axis, tensor rules
  int sparse_level = 8;     // used when dim >= 3
  int max_tensor_dim = 4;   // DimensionTooLarge above this
};

/// Rule used for expectations against an n-dimensional standard normal.
RuleNd normal_rule(int dim, const QuadratureOptions& opts);

/// Adaptive Gauss-Kronrod on a finite interval.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-13);

// Standard normal helpers.
double normal_pdf(double x);
double normal_cdf(double x);
/// P(a < Z < b) for standard normal Z, computed without tail cancellation.
double normal_interval(double a, double b);

}  // namespace smrs
