#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "smrs/grid.hpp"

namespace smrs {

/// Weights w_k = E[hat_k(S)] of the lattice hat functions (piecewise linear in
/// s) when ln S is Gaussian. Nodes span a box given per axis by `first` and
/// `count`; indices may run past the lattice (virtual nodes).
struct HatWeights {
  std::vector<int> first, count;
  bool separable = false;
  std::vector<std::vector<double>> axis;  // separable: one factor per axis
  std::vector<double> dense;              // otherwise: box, last axis fastest

  int dim() const { return static_cast<int>(first.size()); }
  std::size_t box_size() const;
  /// Weight of box entry with per-axis offsets b (0-based inside the box).
  double at(std::span<const int> b) const;
};

/// Expectations of hats k in [first, first + count) for ln S ~ N(mu, sd^2).
/// `dw`, when given, receives d/dmu of each weight.
void hat_moments_1d(const Lattice& lat, double mu, double sd, int first, int count, double* w, double* dw);

/// Nodes whose hats meet [mu - reach sd, mu + reach sd].
void node_range(const Lattice& lat, double mu, double sd, double reach, int& first, int& count);

/// Weights for ln S ~ N(mu, cov). `deriv_axis` >= 0 gives d/dmu_m instead.
HatWeights hat_weights(std::span<const Lattice> lats, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                       int deriv_axis = -1);

/// Applies absolute-index weights to a field block, extended linearly past
/// the lattice with the given edge slopes.
double apply_weights(const HatWeights& hw, const Grid& g, std::span<const double> block, const EdgeSlopes& edges);

/// Shift-invariant stencil: the weights of a source at node 0 of every axis.
/// Convolving gives out[k] = sum_b w_b in[k + first + b] for every node k.
class Convolver {
 public:
  Convolver(const Grid& g, EdgeSlopes edges);

  /// Extends `in` past the lattice and applies the stencil to every node.
  void apply(const HatWeights& stencil, std::span<const double> in, std::span<double> out);

 private:
  void pad(const HatWeights& st, std::span<const double> in);

  const Grid& grid_;
  EdgeSlopes edges_;
  std::vector<int> lo_, dims_;  // padding below and padded extents
  std::vector<double> padded_, scratch_a_, scratch_b_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> weights_;
};

}  // namespace smrs
