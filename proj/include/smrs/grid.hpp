#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "smrs/market.hpp"

namespace smrs {

/// Log-uniform price nodes s_k = exp(z0 + k dz); k outside [0, size) names a
/// virtual node on the same spacing.
struct Lattice {
  double z0 = 0.0;
  double dz = 1.0;
  int size = 1;

  double log_node(int k) const { return z0 + k * dz; }
  double node(int k) const;
  double lower() const { return node(0); }
  double upper() const { return node(size - 1); }
};

/// Slopes used to extend a field past the lattice: `above` beyond the top
/// node of each axis, `below` under the bottom node.
struct EdgeSlopes {
  Eigen::VectorXd below;
  Eigen::VectorXd above;
};

struct GridSpec {
  int time_steps = 40;
  int price_nodes = 41;
  int age_nodes = 11;
  double width_sd = 8.0;  // half-width of the log-price box in total std devs
};

/// Tensor grid: uniform times on [0, T], uniform ages on [0, T] (only ages
/// <= t are used at time t), one log-uniform lattice per asset.
class Grid {
 public:
  Grid(double maturity, int time_steps, int age_nodes, int components, std::vector<Lattice> lattices);

  /// Box = evaluation log-prices +- width_sd total std devs of ln S over [0, T].
  static Grid build(const MarketModel& m, double maturity, const GridSpec& spec, int components,
                    std::span<const Eigen::VectorXd> eval_prices);

  double maturity() const { return maturity_; }
  int time_steps() const { return steps_; }
  int age_nodes() const { return age_nodes_; }
  int components() const { return components_; }
  int assets() const { return static_cast<int>(lattices_.size()); }
  double dt() const { return dt_; }
  double dy() const { return dy_; }
  double time(int i) const { return i == steps_ ? maturity_ : i * dt_; }
  double age(int q) const { return q * dy_; }
  const Lattice& lattice(int a) const { return lattices_[a]; }
  const std::vector<Lattice>& lattices() const { return lattices_; }

  /// Number of age nodes <= t_i.
  int ages_at(int i) const { return ages_at_[i]; }
  /// Age tuples stored at slice i: ages_at(i)^components.
  std::size_t age_tuples(int i) const { return age_tuples_[i]; }
  std::size_t price_count() const { return price_count_; }

  /// Flat price index, last asset fastest.
  std::size_t price_index(std::span<const int> k) const;
  void price_multi(std::size_t flat, std::span<int> k) const;
  Eigen::VectorXd price_at(std::size_t flat) const;

  /// Flat age index at slice i, last component fastest.
  std::size_t age_index(int i, std::span<const int> q) const;
  void age_multi(int i, std::size_t flat, std::span<int> q) const;

  /// Slice index i with t_i <= t < t_{i+1} (M for t = T).
  int slice_below(double t) const;

 private:
  double maturity_;
  int steps_, age_nodes_, components_;
  double dt_, dy_;
  std::vector<Lattice> lattices_;
  std::vector<int> ages_at_;
  std::vector<std::size_t> age_tuples_;
  std::size_t price_count_ = 1;
};

/// Field sampled on a Grid for every regime tuple. Slice i holds
/// [regime][age tuple][price] with price contiguous.
class PriceField {
 public:
  PriceField(Grid grid, int regimes, EdgeSlopes edges);

  const Grid& grid() const { return grid_; }
  int regimes() const { return regimes_; }
  const EdgeSlopes& edges() const { return edges_; }

  std::span<double> block(int i, int regime, std::size_t age_flat);
  std::span<const double> block(int i, int regime, std::size_t age_flat) const;
  std::vector<double>& slice(int i) { return slices_[i]; }
  const std::vector<double>& slice(int i) const { return slices_[i]; }

  double value(int i, int regime, std::size_t age_flat, std::size_t price_flat) const {
    return slices_[i][(static_cast<std::size_t>(regime) * grid_.age_tuples(i) + age_flat) * grid_.price_count() +
                      price_flat];
  }

  /// Multilinear in s inside the box, linear past its edges; ages clamped to
  /// the last node <= t_i.
  double at_slice(int i, int regime, std::span<const double> ages, const Eigen::VectorXd& s) const;
  /// Linear interpolation in t between slices.
  double interpolate(double t, const Eigen::VectorXd& s, int regime, std::span<const double> ages) const;

  /// Total number of stored values.
  std::size_t size() const;

  /// Columnar CSV: t, s1..sn, x0..xn (1-based), y0..yn, value.
  void write_csv(std::ostream& os, const RegimeSpace& space, const std::string& value_name = "phi") const;

 private:
  Grid grid_;
  int regimes_;
  EdgeSlopes edges_;
  std::vector<std::vector<double>> slices_;
};

/// One row per node with a value column per field; all fields share a grid.
void write_fields_csv(std::ostream& os, const RegimeSpace& space, std::span<const PriceField* const> fields,
                      std::span<const std::string> names);

/// Multilinear weights of a point inside a lattice box: corner offsets and
/// weights along one axis.
struct AxisWeights {
  int k0 = 0;        // lower node (clamped)
  double w0 = 1.0;   // weight of k0
  double w1 = 0.0;   // weight of k0 + 1
  double excess = 0.0;  // s - s_edge outside the box, else 0
};
AxisWeights axis_weights(const Lattice& lat, double s);

/// Age position at slice i: lower node, fraction, and whether it was clamped.
struct AgeWeights {
  int q0 = 0;
  double frac = 0.0;
  bool clamped = false;
};
AgeWeights age_weights(const Grid& g, int i, double age);

/// |f| / (1 + |s|_1) maximized over all nodes.
double linear_growth_norm(const PriceField& f);
/// Same for the difference of two fields on one grid.
double linear_growth_distance(const PriceField& a, const PriceField& b);

}  // namespace smrs
