#include "smrs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "smrs/error.hpp"
#include "smrs/format.hpp"

namespace smrs {

double Lattice::node(int k) const { return std::exp(log_node(k)); }

Grid::Grid(double maturity, int time_steps, int age_nodes, int components, std::vector<Lattice> lattices)
    : maturity_(maturity),
      steps_(time_steps),
      age_nodes_(age_nodes),
      components_(components),
      lattices_(std::move(lattices)) {
  if (!(maturity_ > 0.0)) throw ValidationError("grid: maturity must be positive");
  if (steps_ < 1) throw ValidationError("grid: time_steps must be >= 1");
  if (age_nodes_ < 2) throw ValidationError("grid: age_nodes must be >= 2");
  if (components_ < 1) throw ValidationError("grid: need at least one component");
  if (lattices_.empty()) throw ValidationError("grid: need at least one price axis");
  dt_ = maturity_ / steps_;
  dy_ = maturity_ / (age_nodes_ - 1);
  for (const auto& lat : lattices_) {
    if (lat.size < 2 || !(lat.dz > 0.0)) throw ValidationError("grid: each price axis needs >= 2 increasing nodes");
    price_count_ *= static_cast<std::size_t>(lat.size);
  }
  ages_at_.resize(steps_ + 1);
  age_tuples_.resize(steps_ + 1);
  for (int i = 0; i <= steps_; ++i) {
    const double t = time(i);
    int count = static_cast<int>(std::floor(t / dy_ + 1e-9)) + 1;
    count = std::min(count, age_nodes_);
    ages_at_[i] = count;
    std::size_t tuples = 1;
    for (int c = 0; c < components_; ++c) tuples *= static_cast<std::size_t>(count);
    age_tuples_[i] = tuples;
  }
}

Grid Grid::build(const MarketModel& m, double maturity, const GridSpec& spec, int components,
                 std::span<const Eigen::VectorXd> eval_prices) {
  if (eval_prices.empty()) throw ValidationError("grid: at least one evaluation point is required");
  if (spec.price_nodes < 3) throw ValidationError("grid: price_nodes must be >= 3");
  const int n = m.assets();
  std::vector<Lattice> lats(n);
  for (int a = 0; a < n; ++a) {
    double var = 0.0;
    for (int x = 0; x < m.regimes().size(); ++x) {
      Eigen::VectorXd mean;
      Eigen::MatrixXd cov;
      m.integrate(0.0, maturity, x, Measure::risk_neutral, mean, cov);
      var = std::max(var, cov(a, a));
    }
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& s : eval_prices) {
      if (s.size() != n || !(s(a) > 0.0)) throw ValidationError("grid: evaluation prices must be positive, one per asset");
      lo = std::min(lo, std::log(s(a)));
      hi = std::max(hi, std::log(s(a)));
    }
    const double half = spec.width_sd * std::sqrt(var);
    lats[a].z0 = lo - half;
    lats[a].size = spec.price_nodes;
    lats[a].dz = (hi - lo + 2.0 * half) / (spec.price_nodes - 1);
  }
  return Grid(maturity, spec.time_steps, spec.age_nodes, components, std::move(lats));
}

std::size_t Grid::price_index(std::span<const int> k) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < lattices_.size(); ++a) flat = flat * lattices_[a].size + k[a];
  return flat;
}

void Grid::price_multi(std::size_t flat, std::span<int> k) const {
  for (int a = assets() - 1; a >= 0; --a) {
    k[a] = static_cast<int>(flat % lattices_[a].size);
    flat /= lattices_[a].size;
  }
}

Eigen::VectorXd Grid::price_at(std::size_t flat) const {
  Eigen::VectorXd s(assets());
  for (int a = assets() - 1; a >= 0; --a) {
    s(a) = lattices_[a].node(static_cast<int>(flat % lattices_[a].size));
    flat /= lattices_[a].size;
  }
  return s;
}

std::size_t Grid::age_index(int i, std::span<const int> q) const {
  const std::size_t base = ages_at_[i];
  std::size_t flat = 0;
  for (int c = 0; c < components_; ++c) flat = flat * base + q[c];
  return flat;
}

void Grid::age_multi(int i, std::size_t flat, std::span<int> q) const {
  const std::size_t base = ages_at_[i];
  for (int c = components_ - 1; c >= 0; --c) {
    q[c] = static_cast<int>(flat % base);
    flat /= base;
  }
}

int Grid::slice_below(double t) const {
  if (t >= maturity_) return steps_;
  const int i = static_cast<int>(std::floor(t / dt_ + 1e-12));
  return std::clamp(i, 0, steps_);
}

AxisWeights axis_weights(const Lattice& lat, double s) {
  AxisWeights w;
  const double lo = lat.lower(), hi = lat.upper();
  if (s <= lo) {
    w.k0 = 0;
    w.excess = s - lo;
    return w;
  }
  if (s >= hi) {
    w.k0 = lat.size - 1;
    w.excess = s - hi;
    return w;
  }
  int k = static_cast<int>(std::floor((std::log(s) - lat.z0) / lat.dz));
  k = std::clamp(k, 0, lat.size - 2);
  const double a = lat.node(k), b = lat.node(k + 1);
  w.k0 = k;
  w.w1 = (s - a) / (b - a);
  w.w0 = 1.0 - w.w1;
  return w;
}

AgeWeights age_weights(const Grid& g, int i, double age) {
  AgeWeights w;
  const int last = g.ages_at(i) - 1;
  const double pos = std::max(0.0, age) / g.dy();
  int q = static_cast<int>(std::floor(pos + 1e-9));
  if (q >= last) {
    w.q0 = last;
    w.frac = 0.0;
    w.clamped = pos > last + 1e-9;
    return w;
  }
  w.q0 = q;
  w.frac = std::max(0.0, pos - q);
  if (w.frac < 1e-9) w.frac = 0.0;
  return w;
}

PriceField::PriceField(Grid grid, int regimes, EdgeSlopes edges)
    : grid_(std::move(grid)), regimes_(regimes), edges_(std::move(edges)) {
  if (edges_.above.size() != grid_.assets() || edges_.below.size() != grid_.assets()) {
    throw Error("price field: edge slopes have the wrong length");
  }
  slices_.resize(grid_.time_steps() + 1);
  for (int i = 0; i <= grid_.time_steps(); ++i) {
    slices_[i].assign(static_cast<std::size_t>(regimes_) * grid_.age_tuples(i) * grid_.price_count(), 0.0);
  }
}

std::span<double> PriceField::block(int i, int regime, std::size_t age_flat) {
  const std::size_t np = grid_.price_count();
  return {slices_[i].data() + (static_cast<std::size_t>(regime) * grid_.age_tuples(i) + age_flat) * np, np};
}

std::span<const double> PriceField::block(int i, int regime, std::size_t age_flat) const {
  const std::size_t np = grid_.price_count();
  return {slices_[i].data() + (static_cast<std::size_t>(regime) * grid_.age_tuples(i) + age_flat) * np, np};
}

std::size_t PriceField::size() const {
  std::size_t total = 0;
  for (const auto& s : slices_) total += s.size();
  return total;
}

double PriceField::at_slice(int i, int regime, std::span<const double> ages, const Eigen::VectorXd& s) const {
  const int n = grid_.assets();
  const int c = grid_.components();
  std::vector<AxisWeights> aw(n);
  double excess = 0.0;
  for (int a = 0; a < n; ++a) {
    aw[a] = axis_weights(grid_.lattice(a), s(a));
    excess += (aw[a].excess > 0.0 ? edges_.above(a) : edges_.below(a)) * aw[a].excess;
  }
  std::vector<AgeWeights> yw(c);
  for (int m = 0; m < c; ++m) yw[m] = age_weights(grid_, i, ages[m]);

  std::vector<int> q(c), k(n);
  double total = 0.0;
  for (int ycorner = 0; ycorner < (1 << c); ++ycorner) {
    double wy = 1.0;
    for (int m = 0; m < c; ++m) {
      const bool up = (ycorner >> m) & 1;
      if (up && yw[m].frac == 0.0) {
        wy = 0.0;
        break;
      }
      wy *= up ? yw[m].frac : 1.0 - yw[m].frac;
      q[m] = yw[m].q0 + (up ? 1 : 0);
    }
    if (wy == 0.0) continue;
    const auto blk = block(i, regime, grid_.age_index(i, q));
    for (int scorner = 0; scorner < (1 << n); ++scorner) {
      double ws = wy;
      for (int a = 0; a < n; ++a) {
        const bool up = (scorner >> a) & 1;
        const double w = up ? aw[a].w1 : aw[a].w0;
        if (w == 0.0) {
          ws = 0.0;
          break;
        }
        ws *= w;
        k[a] = aw[a].k0 + (up ? 1 : 0);
      }
      if (ws == 0.0) continue;
      total += ws * blk[grid_.price_index(k)];
    }
  }
  return total + excess;
}

double PriceField::interpolate(double t, const Eigen::VectorXd& s, int regime, std::span<const double> ages) const {
  const int i = grid_.slice_below(t);
  const double lo = at_slice(i, regime, ages, s);
  if (i == grid_.time_steps()) return lo;
  const double w = (t - grid_.time(i)) / grid_.dt();
  if (w <= 0.0) return lo;
  return (1.0 - w) * lo + w * at_slice(i + 1, regime, ages, s);
}

void PriceField::write_csv(std::ostream& os, const RegimeSpace& space, const std::string& value_name) const {
  const PriceField* self = this;
  write_fields_csv(os, space, std::span<const PriceField* const>(&self, 1), std::span<const std::string>(&value_name, 1));
}

void write_fields_csv(std::ostream& os, const RegimeSpace& space, std::span<const PriceField* const> fields,
                      std::span<const std::string> names) {
  if (fields.empty() || fields.size() != names.size()) throw Error("write_fields_csv: need one name per field");
  const PriceField& head = *fields.front();
  const Grid& g = head.grid();
  for (const PriceField* f : fields) {
    if (f->grid().price_count() != g.price_count() || f->regimes() != head.regimes() ||
        f->grid().time_steps() != g.time_steps()) {
      throw Error("write_fields_csv: fields live on different grids");
    }
  }
  const int n = g.assets(), c = g.components();
  os << "t";
  for (int a = 0; a < n; ++a) os << ",s" << a + 1;
  for (int m = 0; m < c; ++m) os << ",x" << m;
  for (int m = 0; m < c; ++m) os << ",y" << m;
  for (const auto& name : names) os << ',' << name;
  os << '\n';
  std::vector<int> q(c);
  for (int i = 0; i <= g.time_steps(); ++i) {
    const std::string t = format_number(g.time(i));
    for (int x = 0; x < head.regimes(); ++x) {
      std::string xs;
      for (int v : space.tuple(x)) xs += "," + std::to_string(v + 1);
      for (std::size_t af = 0; af < g.age_tuples(i); ++af) {
        g.age_multi(i, af, q);
        std::string ys;
        for (int m = 0; m < c; ++m) ys += "," + format_number(g.age(q[m]));
        for (std::size_t p = 0; p < g.price_count(); ++p) {
          const Eigen::VectorXd s = g.price_at(p);
          os << t;
          for (int a = 0; a < n; ++a) os << ',' << format_number(s(a));
          os << xs << ys;
          for (const PriceField* f : fields) os << ',' << format_number(f->value(i, x, af, p));
          os << '\n';
        }
      }
    }
  }
}

double linear_growth_norm(const PriceField& f) {
  const Grid& g = f.grid();
  std::vector<double> scale(g.price_count());
  for (std::size_t p = 0; p < scale.size(); ++p) scale[p] = 1.0 / (1.0 + g.price_at(p).lpNorm<1>());
  double best = 0.0;
  for (int i = 0; i <= g.time_steps(); ++i) {
    const auto& sl = f.slice(i);
    for (std::size_t k = 0; k < sl.size(); ++k) best = std::max(best, std::abs(sl[k]) * scale[k % scale.size()]);
  }
  return best;
}

double linear_growth_distance(const PriceField& a, const PriceField& b) {
  const Grid& g = a.grid();
  if (a.size() != b.size()) throw Error("linear_growth_distance: fields live on different grids");
  std::vector<double> scale(g.price_count());
  for (std::size_t p = 0; p < scale.size(); ++p) scale[p] = 1.0 / (1.0 + g.price_at(p).lpNorm<1>());
  double best = 0.0;
  for (int i = 0; i <= g.time_steps(); ++i) {
    const auto& sa = a.slice(i);
    const auto& sb = b.slice(i);
    for (std::size_t k = 0; k < sa.size(); ++k) {
      best = std::max(best, std::abs(sa[k] - sb[k]) * scale[k % scale.size()]);
    }
  }
  return best;
}

}  // namespace smrs
