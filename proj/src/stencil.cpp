#include "smrs/stencil.hpp"

#include <algorithm>
#include <cmath>

#include "smrs/error.hpp"
#include "smrs/quadrature.hpp"

namespace smrs {

namespace {
constexpr double kReach = 9.0;
constexpr int kCellNodes = 24;
// dense taps below this fraction of the peak weight are skipped
constexpr double kPrune = 1e-17;

// Product of extents.
std::size_t volume(const std::vector<int>& dims) {
  std::size_t v = 1;
  for (int d : dims) v *= static_cast<std::size_t>(d);
  return v;
}
}  // namespace

std::size_t HatWeights::box_size() const { return volume(count); }

double HatWeights::at(std::span<const int> b) const {
  if (separable) {
    double w = 1.0;
    for (int a = 0; a < dim(); ++a) w *= axis[a][b[a]];
    return w;
  }
  std::size_t flat = 0;
  for (int a = 0; a < dim(); ++a) flat = flat * count[a] + b[a];
  return dense[flat];
}

void node_range(const Lattice& lat, double mu, double sd, double reach, int& first, int& count) {
  const double lo = (mu - reach * sd - lat.z0) / lat.dz;
  const double hi = (mu + reach * sd - lat.z0) / lat.dz;
  first = static_cast<int>(std::floor(lo));
  count = static_cast<int>(std::ceil(hi)) - first + 1;
}

void hat_moments_1d(const Lattice& lat, double mu, double sd, int first, int count, double* w, double* dw) {
  // cell c spans [z_c, z_{c+1}]; cells first-1 .. first+count-1 are touched
  const int cells = count + 1;
  std::vector<double> p(cells), e(cells), dp(cells), de(cells);
  const double growth = std::exp(mu + 0.5 * sd * sd);
  for (int c = 0; c < cells; ++c) {
    const int k = first - 1 + c;
    const double a = lat.log_node(k), b = lat.log_node(k + 1);
    const double al = (a - mu) / sd, be = (b - mu) / sd;
    const double al1 = al - sd, be1 = be - sd;
    p[c] = normal_interval(al, be);
    e[c] = growth * normal_interval(al1, be1);
    if (dw) {
      dp[c] = (normal_pdf(al) - normal_pdf(be)) / sd;
      de[c] = e[c] + growth * (normal_pdf(al1) - normal_pdf(be1)) / sd;
    }
  }
  for (int j = 0; j < count; ++j) {
    const int k = first + j;
    const double sl = lat.node(k - 1), sk = lat.node(k), sr = lat.node(k + 1);
    // left half of the hat lives in cell j, right half in cell j + 1
    w[j] = (e[j] - sl * p[j]) / (sk - sl) + (sr * p[j + 1] - e[j + 1]) / (sr - sk);
    if (dw) dw[j] = (de[j] - sl * dp[j]) / (sk - sl) + (sr * dp[j + 1] - de[j + 1]) / (sr - sk);
  }
}

namespace {

bool is_diagonal(const Eigen::MatrixXd& cov) {
  for (int a = 0; a < cov.rows(); ++a) {
    for (int b = 0; b < cov.cols(); ++b) {
      if (a != b && std::abs(cov(a, b)) > 1e-14 * std::sqrt(cov(a, a) * cov(b, b))) return false;
    }
  }
  return true;
}

// Conditional recursion: integrate axis d over lattice cells with Gauss-Legendre,
// condition the remaining axes on it, close the last axis analytically.
struct Recursion {
  std::span<const Lattice> lats;
  const std::vector<int>& first;
  const std::vector<int>& count;
  std::vector<double>& out;
  std::vector<std::size_t> stride;
  // per level: regression coefficients of the remaining axes on axis d and
  // the conditional covariance after removing axis d
  std::vector<Eigen::MatrixXd> covs;
  std::vector<Eigen::VectorXd> betas;

  void run(int d, const Eigen::VectorXd& mu, std::size_t base, double factor) {
    const int n = static_cast<int>(lats.size());
    const Eigen::MatrixXd& cov = covs[d];
    const double sd = std::sqrt(cov(0, 0));
    const Lattice& lat = lats[d];
    if (d == n - 1) {
      std::vector<double> w(count[d]);
      hat_moments_1d(lat, mu(0), sd, first[d], count[d], w.data(), nullptr);
      for (int j = 0; j < count[d]; ++j) out[base + j * stride[d]] += factor * w[j];
      return;
    }
    const Rule1d& gl = gauss_legendre(kCellNodes);
    const double lo = mu(0) - kReach * sd, hi = mu(0) + kReach * sd;
    Eigen::VectorXd sub(n - d - 1);
    for (int j = -1; j < count[d]; ++j) {
      const int k = first[d] + j;  // cell [z_k, z_{k+1}]
      const double a = std::max(lat.log_node(k), lo), b = std::min(lat.log_node(k + 1), hi);
      if (!(b > a)) continue;
      const double sk = lat.node(k), sk1 = lat.node(k + 1);
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
        const double u = mid + half * gl.nodes[g];
        const double dens = half * gl.weights[g] * normal_pdf((u - mu(0)) / sd) / sd;
        const double up = (std::exp(u) - sk) / (sk1 - sk);
        sub = mu.tail(n - d - 1) + betas[d] * (u - mu(0));
        if (j >= 0) run(d + 1, sub, base + j * stride[d], factor * dens * (1.0 - up));
        if (j + 1 < count[d]) run(d + 1, sub, base + (j + 1) * stride[d], factor * dens * up);
      }
    }
  }
};

HatWeights dense_weights(std::span<const Lattice> lats, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                         const std::vector<int>& first, const std::vector<int>& count) {
  const int n = static_cast<int>(lats.size());
  HatWeights hw;
  hw.first = first;
  hw.count = count;
  hw.dense.assign(volume(count), 0.0);
  Recursion rec{lats, hw.first, hw.count, hw.dense, std::vector<std::size_t>(n), {}, {}};
  std::size_t s = 1;
  for (int a = n - 1; a >= 0; --a) {
    rec.stride[a] = s;
    s *= static_cast<std::size_t>(count[a]);
  }
  Eigen::MatrixXd c = cov;
  for (int d = 0; d < n; ++d) {
    rec.covs.push_back(c);
    if (d == n - 1) break;
    const int rest = n - d - 1;
    Eigen::VectorXd beta = c.col(0).tail(rest) / c(0, 0);
    rec.betas.push_back(beta);
    c = Eigen::MatrixXd(c.bottomRightCorner(rest, rest) - beta * c.row(0).tail(rest));
  }
  rec.run(0, mu, 0, 1.0);
  return hw;
}

}  // namespace

HatWeights hat_weights(std::span<const Lattice> lats, const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                       int deriv_axis) {
  const int n = static_cast<int>(lats.size());
  HatWeights hw;
  hw.first.resize(n);
  hw.count.resize(n);
  for (int a = 0; a < n; ++a) {
    if (!(cov(a, a) > 0.0)) throw Error("hat_weights: variance must be positive");
    node_range(lats[a], mu(a), std::sqrt(cov(a, a)), kReach, hw.first[a], hw.count[a]);
  }
  if (is_diagonal(cov)) {
    hw.separable = true;
    hw.axis.resize(n);
    for (int a = 0; a < n; ++a) {
      hw.axis[a].resize(hw.count[a]);
      std::vector<double> dw(a == deriv_axis ? hw.count[a] : 0);
      hat_moments_1d(lats[a], mu(a), std::sqrt(cov(a, a)), hw.first[a], hw.count[a], hw.axis[a].data(),
                     a == deriv_axis ? dw.data() : nullptr);
      if (a == deriv_axis) hw.axis[a] = dw;
    }
    return hw;
  }
  if (deriv_axis < 0) return dense_weights(lats, mu, cov, hw.first, hw.count);
  // fourth-order central difference in the mean
  const double h = 1e-3 * std::sqrt(cov(deriv_axis, deriv_axis));
  HatWeights out = dense_weights(lats, mu, cov, hw.first, hw.count);
  std::fill(out.dense.begin(), out.dense.end(), 0.0);
  const double coef[4] = {1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0};
  const double step[4] = {-2.0, -1.0, 1.0, 2.0};
  for (int q = 0; q < 4; ++q) {
    Eigen::VectorXd m = mu;
    m(deriv_axis) += step[q] * h;
    const HatWeights part = dense_weights(lats, m, cov, hw.first, hw.count);
    for (std::size_t b = 0; b < out.dense.size(); ++b) out.dense[b] += coef[q] * part.dense[b] / h;
  }
  return out;
}

double apply_weights(const HatWeights& hw, const Grid& g, std::span<const double> block, const EdgeSlopes& edges) {
  const int n = hw.dim();
  std::vector<int> b(n, 0), k(n), kc(n);
  const std::size_t total = hw.box_size();
  double acc = 0.0;
  for (std::size_t e = 0; e < total; ++e) {
    double ext = 0.0;
    for (int a = 0; a < n; ++a) {
      k[a] = hw.first[a] + b[a];
      const Lattice& lat = g.lattice(a);
      kc[a] = std::clamp(k[a], 0, lat.size - 1);
      if (k[a] != kc[a]) ext += (k[a] > kc[a] ? edges.above(a) : edges.below(a)) * (lat.node(k[a]) - lat.node(kc[a]));
    }
    const double w = hw.at(b);
    if (w != 0.0) acc += w * (block[g.price_index(kc)] + ext);
    for (int a = n - 1; a >= 0; --a) {
      if (++b[a] < hw.count[a]) break;
      b[a] = 0;
    }
  }
  return acc;
}

Convolver::Convolver(const Grid& g, EdgeSlopes edges) : grid_(g), edges_(std::move(edges)) {}

void Convolver::pad(const HatWeights& st, std::span<const double> in) {
  const int n = grid_.assets();
  lo_.assign(n, 0);
  dims_.assign(n, 0);
  for (int a = 0; a < n; ++a) {
    const int size = grid_.lattice(a).size;
    lo_[a] = std::max(0, -st.first[a]);
    const int hi = std::max(0, st.first[a] + st.count[a] - 1);
    dims_[a] = size + lo_[a] + hi;
  }
  const std::size_t total = volume(dims_);
  padded_.resize(total);
  std::vector<int> p(n, 0), k(n);
  // per-axis extension terms, reused across the box
  std::vector<std::vector<double>> ext(n);
  std::vector<std::vector<int>> clampk(n);
  for (int a = 0; a < n; ++a) {
    const Lattice& lat = grid_.lattice(a);
    ext[a].resize(dims_[a]);
    clampk[a].resize(dims_[a]);
    for (int j = 0; j < dims_[a]; ++j) {
      const int kk = j - lo_[a];
      const int kc = std::clamp(kk, 0, lat.size - 1);
      clampk[a][j] = kc;
      ext[a][j] = kk == kc ? 0.0 : (kk > kc ? edges_.above(a) : edges_.below(a)) * (lat.node(kk) - lat.node(kc));
    }
  }
  for (std::size_t e = 0; e < total; ++e) {
    double extra = 0.0;
    for (int a = 0; a < n; ++a) {
      k[a] = clampk[a][p[a]];
      extra += ext[a][p[a]];
    }
    padded_[e] = in[grid_.price_index(k)] + extra;
    for (int a = n - 1; a >= 0; --a) {
      if (++p[a] < dims_[a]) break;
      p[a] = 0;
    }
  }
}

void Convolver::apply(const HatWeights& st, std::span<const double> in, std::span<double> out) {
  const int n = grid_.assets();
  pad(st, in);
  if (st.separable) {
    // contract one axis at a time; the extent of axis a drops to the lattice size
    std::vector<int> dims = dims_;
    const std::vector<double>* src = &padded_;
    std::vector<double>* dst = &scratch_a_;
    for (int a = 0; a < n; ++a) {
      const int size = grid_.lattice(a).size;
      std::size_t outer = 1, inner = 1;
      for (int b = 0; b < a; ++b) outer *= dims[b];
      for (int b = a + 1; b < n; ++b) inner *= dims[b];
      const int din = dims[a];
      dst->assign(outer * size * inner, 0.0);
      const auto& w = st.axis[a];
      const int cnt = st.count[a];
      const int shift = lo_[a] + st.first[a];
      for (std::size_t o = 0; o < outer; ++o) {
        const double* sbase = src->data() + o * din * inner;
        double* dbase = dst->data() + o * size * inner;
        for (int k = 0; k < size; ++k) {
          double* d = dbase + k * inner;
          const double* s0 = sbase + (k + shift) * inner;
          if (inner == 1) {
            double acc = 0.0;
            for (int t = 0; t < cnt; ++t) acc += w[t] * s0[t];
            d[0] = acc;
          } else {
            for (int t = 0; t < cnt; ++t) {
              const double wt = w[t];
              const double* s = s0 + t * inner;
              for (std::size_t i = 0; i < inner; ++i) d[i] += wt * s[i];
            }
          }
        }
      }
      dims[a] = size;
      src = dst;
      dst = (dst == &scratch_a_) ? &scratch_b_ : &scratch_a_;
    }
    std::copy(src->begin(), src->end(), out.begin());
    return;
  }
  // dense box: out[k] = sum_b w_b padded[k + lo + first + b], done as
  // contiguous axpys along the last axis; negligible taps are dropped
  std::vector<std::size_t> pstride(n);
  std::size_t s = 1;
  for (int a = n - 1; a >= 0; --a) {
    pstride[a] = s;
    s *= dims_[a];
  }
  double peak = 0.0;
  for (double w : st.dense) peak = std::max(peak, std::abs(w));
  offsets_.clear();
  weights_.clear();
  {
    std::vector<int> b(n, 0);
    for (std::size_t e = 0; e < st.box_size(); ++e) {
      const double w = st.dense[e];
      if (std::abs(w) > kPrune * peak) {
        std::ptrdiff_t off = 0;
        for (int a = 0; a < n; ++a) off += static_cast<std::ptrdiff_t>(b[a] + lo_[a] + st.first[a]) * pstride[a];
        offsets_.push_back(off);
        weights_.push_back(w);
      }
      for (int a = n - 1; a >= 0; --a) {
        if (++b[a] < st.count[a]) break;
        b[a] = 0;
      }
    }
  }
  const int row = grid_.lattice(n - 1).size;
  const std::size_t rows = grid_.price_count() / row;
  std::vector<int> k(n, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t base = 0;
    for (int a = 0; a + 1 < n; ++a) base += static_cast<std::size_t>(k[a]) * pstride[a];
    double* o = out.data() + r * row;
    std::fill(o, o + row, 0.0);
    for (std::size_t q = 0; q < offsets_.size(); ++q) {
      const double w = weights_[q];
      const double* src = padded_.data() + base + offsets_[q];
      for (int j = 0; j < row; ++j) o[j] += w * src[j];
    }
    for (int a = n - 2; a >= 0; --a) {
      if (++k[a] < grid_.lattice(a).size) break;
      k[a] = 0;
    }
  }
}

}  // namespace smrs
