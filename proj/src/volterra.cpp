#include "smrs/volterra.hpp"

#include <algorithm>
#include <cmath>

#include "smrs/error.hpp"
#include "smrs/parallel.hpp"
#include "smrs/regime_bsm.hpp"
#include "smrs/semi_markov.hpp"

namespace smrs {

namespace {
constexpr double kAgeEps = 1e-9;

// Node weight of v-node a for hat-interpolated integrands: rising half of
// panel a plus falling half of panel a + 1 (panels are 1-based).
double node_weight(const double* rise, const double* fall, int a, int last) {
  double w = 0.0;
  if (a >= 1) w += rise[a - 1];
  if (a < last) w += fall[a];
  return w;
}
}  // namespace

VolterraSolver::VolterraSolver(const MarketModel& market, const Claim& claim, std::vector<HazardModel> models,
                               Grid grid, SolverOptions opts)
    : market_(market),
      claim_(claim),
      models_(std::move(models)),
      grid_(std::move(grid)),
      opts_(opts),
      space_(market.regimes()) {
  const int c = static_cast<int>(models_.size());
  if (c != space_.components() || c != grid_.components()) {
    throw ValidationError("solver: hazard models, regime space and grid disagree on the component count");
  }
  if (claim_.assets() != market_.assets() || grid_.assets() != market_.assets()) {
    throw ValidationError("solver: claim, market and grid disagree on the asset count");
  }
  for (int l = 0; l < c; ++l) {
    if (models_[l].states() != space_.states(l)) {
      throw ValidationError("solver: component " + std::to_string(l) + " state count differs from the regime space");
    }
    states_max_ = std::max(states_max_, models_[l].states());
  }
  if (!(opts_.tol > 0.0)) throw ValidationError("solver: tol must be positive");
  if (opts_.max_iter < 1) throw ValidationError("solver: max_iter must be >= 1");
  if (opts_.v_nodes < 1) throw ValidationError("solver: v_nodes must be >= 1");
  edges_ = EdgeSlopes{claim_.c0(), claim_.c1()};
  full_tuples_ = 1;
  for (int l = 0; l < c; ++l) full_tuples_ *= static_cast<std::size_t>(grid_.age_nodes());
  build_laws();
  build_rho();
  build_stencils();
}

std::size_t VolterraSolver::law_index(int x, std::size_t full_age) const {
  return static_cast<std::size_t>(x) * full_tuples_ + full_age;
}

std::size_t VolterraSolver::full_age_index(int i, std::size_t age_flat) const {
  const std::size_t base = grid_.ages_at(i);
  const std::size_t q_total = grid_.age_nodes();
  std::size_t full = 0, scale = 1;
  for (int c = grid_.components() - 1; c >= 0; --c) {
    full += (age_flat % base) * scale;
    age_flat /= base;
    scale *= q_total;
  }
  return full;
}

void VolterraSolver::build_laws() {
  const int c = grid_.components();
  const int m_steps = grid_.time_steps();
  const int q_total = grid_.age_nodes();
  const int last_needed = grid_.ages_at(m_steps - 1) - 1;
  const std::size_t laws = static_cast<std::size_t>(space_.size()) * full_tuples_;
  prob_.assign(laws * c, 0.0);
  const std::size_t per_law = static_cast<std::size_t>(c) * states_max_ * m_steps;
  rise_.assign(laws * per_law, 0.0);
  fall_.assign(laws * per_law, 0.0);
  law_ready_.assign(laws, 0);
  const Rule1d& gl = gauss_legendre(opts_.v_nodes);
  const double dt = grid_.dt();

  parallel_for(laws, opts_.threads, [&](std::size_t idx, int) {
    const int x = static_cast<int>(idx / full_tuples_);
    std::size_t rem = idx % full_tuples_;
    CsmState st;
    st.x = space_.tuple(x);
    st.y.resize(c);
    for (int m = c - 1; m >= 0; --m) {
      const int q = static_cast<int>(rem % q_total);
      rem /= q_total;
      if (q > last_needed) return;
      st.y[m] = grid_.age(q);
    }
    const NextJumpLaw law(models_, st);
    for (int l = 0; l < c; ++l) {
      prob_[idx * c + l] = law.component_prob(l);
      for (int a = 1; a <= m_steps; ++a) {
        const double v0 = (a - 1) * dt, half = 0.5 * dt;
        for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
          const double v = v0 + half * (1.0 + gl.nodes[g]);
          const double f = half * gl.weights[g] * law.pdf(l, v);
          if (f == 0.0) continue;
          const auto pd = models_[l].transition_probs(st.x[l], st.y[l] + v);
          const double up = (v - v0) / dt;
          for (int d = 0; d < models_[l].states(); ++d) {
            if (pd[d] == 0.0) continue;
            const std::size_t k = idx * per_law + (static_cast<std::size_t>(l) * states_max_ + d) * m_steps + (a - 1);
            rise_[k] += f * pd[d] * up;
            fall_[k] += f * pd[d] * (1.0 - up);
          }
        }
      }
    }
    law_ready_[idx] = 1;
  });

  // contraction certificate: sum_l P_l F_l(T - t_i) over stored nodes
  bound_ = 0.0;
  std::vector<int> q(c);
  for (int i = 0; i < m_steps; ++i) {
    const int last = m_steps - i;
    for (int x = 0; x < space_.size(); ++x) {
      for (std::size_t af = 0; af < grid_.age_tuples(i); ++af) {
        const std::size_t li = law_index(x, full_age_index(i, af));
        double total = 0.0;
        for (int l = 0; l < c; ++l) {
          double f = 0.0;
          for (int d = 0; d < states_max_; ++d) {
            const std::size_t base = li * per_law + (static_cast<std::size_t>(l) * states_max_ + d) * m_steps;
            for (int a = 1; a <= last; ++a) f += rise_[base + a - 1] + fall_[base + a - 1];
          }
          total += prob_[li * c + l] * f;
        }
        bound_ = std::max(bound_, total);
      }
    }
  }
}

void VolterraSolver::build_rho() {
  const int m_steps = grid_.time_steps();
  const std::size_t np = grid_.price_count();
  const int nx = space_.size();
  rho_.assign(m_steps + 1, std::vector<double>(static_cast<std::size_t>(nx) * np));
  parallel_for(static_cast<std::size_t>(m_steps + 1) * nx, opts_.threads, [&](std::size_t idx, int) {
    const int i = static_cast<int>(idx / nx);
    const int x = static_cast<int>(idx % nx);
    double* out = rho_[i].data() + static_cast<std::size_t>(x) * np;
    if (i == m_steps) {
      for (std::size_t p = 0; p < np; ++p) out[p] = claim_.payoff(grid_.price_at(p));
      return;
    }
    const double t = grid_.time(i);
    const auto kern = build_kernel(market_, t, x, maturity() - t, Measure::risk_neutral, grid_.price_at(0));
    for (std::size_t p = 0; p < np; ++p) {
      out[p] = bsm_price(with_spot(kern, grid_.price_at(p)), claim_, market_.rate(x), opts_.quad);
    }
  });
}

void VolterraSolver::build_stencils() {
  const int m_steps = grid_.time_steps();
  const int nx = space_.size();
  stencil_offset_.assign(m_steps + 1, 0);
  std::size_t total = 0;
  for (int i = 0; i <= m_steps; ++i) {
    stencil_offset_[i] = total;
    total += static_cast<std::size_t>(m_steps - i) * nx;
  }
  stencils_.assign(total, HatWeights{});
  const int n = grid_.assets();
  parallel_for(total, opts_.threads, [&](std::size_t idx, int) {
    int i = static_cast<int>(std::upper_bound(stencil_offset_.begin(), stencil_offset_.end(), idx) -
                             stencil_offset_.begin()) - 1;
    const std::size_t local = idx - stencil_offset_[i];
    const int j = i + 1 + static_cast<int>(local / nx);
    const int x = static_cast<int>(local % nx);
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    market_.integrate(grid_.time(i), grid_.time(j) - grid_.time(i), x, Measure::risk_neutral, mean, cov);
    Eigen::VectorXd mu(n);
    for (int a = 0; a < n; ++a) mu(a) = grid_.lattice(a).z0 + mean(a);
    stencils_[idx] = hat_weights(grid_.lattices(), mu, cov);
  });
}

const HatWeights& VolterraSolver::stencil(int i, int j, int x) const {
  return stencils_[stencil_offset_[i] + static_cast<std::size_t>(j - i - 1) * space_.size() + x];
}

PriceField VolterraSolver::initial_field() const {
  PriceField f(grid_, space_.size(), edges_);
  const std::size_t np = grid_.price_count();
  for (int i = 0; i <= grid_.time_steps(); ++i) {
    for (int x = 0; x < space_.size(); ++x) {
      const double* src = rho_[i].data() + static_cast<std::size_t>(x) * np;
      for (std::size_t af = 0; af < grid_.age_tuples(i); ++af) {
        auto blk = f.block(i, x, af);
        std::copy(src, src + np, blk.begin());
      }
    }
  }
  return f;
}

std::size_t VolterraSolver::sweep_slice(const PriceField& in, int i, std::vector<double>& out, int asset) const {
  const int c = grid_.components();
  const int n = grid_.assets();
  const int m_steps = grid_.time_steps();
  const int nx = space_.size();
  const std::size_t np = grid_.price_count();
  const std::size_t ti = grid_.age_tuples(i);
  const double dy = grid_.dy();
  const std::size_t per_law = static_cast<std::size_t>(c) * states_max_ * m_steps;
  const int last = m_steps - i;
  out.assign(static_cast<std::size_t>(nx) * ti * np, 0.0);

  // derivative mode needs frozen-regime deltas and node prices
  std::vector<double> delta;
  std::vector<double> spot;
  if (asset >= 0) {
    delta.resize(static_cast<std::size_t>(nx) * np);
    spot.resize(np);
    for (std::size_t p = 0; p < np; ++p) spot[p] = grid_.price_at(p)(asset);
    const double t = grid_.time(i);
    for (int x = 0; x < nx; ++x) {
      const auto kern = build_kernel(market_, t, x, maturity() - t, Measure::risk_neutral, grid_.price_at(0));
      for (std::size_t p = 0; p < np; ++p) {
        delta[x * np + p] = bsm_delta(with_spot(kern, grid_.price_at(p)), claim_, market_.rate(x), asset, opts_.quad);
      }
    }
  }

  std::vector<std::size_t> clamps(nx, 0);
  parallel_for(nx, opts_.threads, [&](std::size_t xi, int) {
    const int x = static_cast<int>(xi);
    const auto xs = space_.tuple(x);
    const double r = market_.rate(x);
    Convolver conv(grid_, edges_);
    double* outx = out.data() + xi * ti * np;
    const double* frozen = asset < 0 ? rho_[i].data() + xi * np : delta.data() + xi * np;
    std::vector<int> qs(c), qt(c);
    std::vector<std::size_t> law_of(ti);
    for (std::size_t af = 0; af < ti; ++af) law_of[af] = law_index(x, full_age_index(i, af));

    // no-jump part
    for (std::size_t af = 0; af < ti; ++af) {
      const std::size_t li = law_of[af];
      double stay = 1.0;
      for (int l = 0; l < c; ++l) {
        double f = 0.0;
        for (int d = 0; d < states_max_; ++d) {
          const std::size_t base = li * per_law + (static_cast<std::size_t>(l) * states_max_ + d) * m_steps;
          for (int a = 1; a <= last; ++a) f += rise_[base + a - 1] + fall_[base + a - 1];
        }
        stay -= prob_[li * c + l] * f;
      }
      double* o = outx + af * np;
      for (std::size_t p = 0; p < np; ++p) o[p] = stay * frozen[p];
    }

    std::vector<double> gbuf, slope(np);
    std::vector<double> acc(np);
    for (int j = i; j <= m_steps; ++j) {
      const int a = j - i;
      const double v = grid_.time(j) - grid_.time(i);
      const double disc = std::exp(-r * v);
      const int aj = grid_.ages_at(j);
      const int lo = std::min(static_cast<int>(std::floor(v / dy + kAgeEps)), aj - 1);
      const int span = aj - lo;
      std::size_t targets = 1;
      for (int m = 0; m < c - 1; ++m) targets *= static_cast<std::size_t>(span);
      HatWeights dstencil;
      const HatWeights* st = nullptr;
      if (j > i) {
        if (asset < 0) {
          st = &stencil(i, j, x);
        } else {
          Eigen::VectorXd mean;
          Eigen::MatrixXd cov;
          market_.integrate(grid_.time(i), v, x, Measure::risk_neutral, mean, cov);
          Eigen::VectorXd mu(n);
          for (int b = 0; b < n; ++b) mu(b) = grid_.lattice(b).z0 + mean(b);
          dstencil = hat_weights(grid_.lattices(), mu, cov, asset);
          st = &dstencil;
        }
      }
      for (int l = 0; l < c; ++l) {
        for (int d = 0; d < models_[l].states(); ++d) {
          if (d == xs[l]) continue;
          const int x2 = space_.replaced(x, l, d);
          if (j > i) {
            gbuf.assign(targets * np, 0.0);
            for (std::size_t tg = 0; tg < targets; ++tg) {
              std::size_t rem = tg;
              for (int m = c - 1; m >= 0; --m) {
                if (m == l) {
                  qt[m] = 0;
                  continue;
                }
                qt[m] = lo + static_cast<int>(rem % span);
                rem /= span;
              }
              std::span<double> g(gbuf.data() + tg * np, np);
              conv.apply(*st, in.block(j, x2, grid_.age_index(j, qt)), g);
              if (asset >= 0) {
                for (std::size_t p = 0; p < np; ++p) g[p] /= spot[p];
              }
            }
          }
          for (std::size_t af = 0; af < ti; ++af) {
            const std::size_t li = law_of[af];
            const double pl = prob_[li * c + l];
            if (pl == 0.0) continue;
            const std::size_t base = li * per_law + (static_cast<std::size_t>(l) * states_max_ + d) * m_steps;
            const double w = pl * disc * node_weight(&rise_[base], &fall_[base], a, last);
            if (w == 0.0) continue;
            grid_.age_multi(i, af, qs);
            double* o = outx + af * np;
            if (j == i) {
              qt = qs;
              qt[l] = 0;
              const auto blk = in.block(i, x2, grid_.age_index(i, qt));
              if (asset < 0) {
                for (std::size_t p = 0; p < np; ++p) o[p] += w * blk[p];
              } else {
                // central slope of the interpolant along the asset axis
                const Lattice& lat = grid_.lattice(asset);
                std::size_t stride = 1;
                for (int b = n - 1; b > asset; --b) stride *= grid_.lattice(b).size;
                for (std::size_t p = 0; p < np; ++p) {
                  const int k = static_cast<int>((p / stride) % lat.size);
                  const double sl = lat.node(k - 1), sr = lat.node(k + 1);
                  const double fl = k > 0 ? blk[p - stride] : blk[p] + edges_.below(asset) * (sl - lat.node(k));
                  const double fr = k + 1 < lat.size ? blk[p + stride] : blk[p] + edges_.above(asset) * (sr - lat.node(k));
                  o[p] += w * (fr - fl) / (sr - sl);
                }
              }
              continue;
            }
            // interpolate the target ages R_0^l(y + v) between stored tuples
            std::vector<int> q0(c, 0);
            std::vector<double> frac(c, 0.0);
            for (int m = 0; m < c; ++m) {
              if (m == l) continue;
              const double pos = (grid_.age(qs[m]) + v) / dy;
              int q = static_cast<int>(std::floor(pos + kAgeEps));
              double fr = std::max(0.0, pos - q);
              if (fr < kAgeEps) fr = 0.0;
              if (q >= aj - 1) {
                if (pos > aj - 1 + kAgeEps) ++clamps[xi];
                q = aj - 1;
                fr = 0.0;
              }
              q0[m] = q - lo;
              frac[m] = fr;
            }
            for (int corner = 0; corner < (1 << c); ++corner) {
              if ((corner >> l) & 1) continue;
              double wc = w;
              std::size_t tg = 0;
              bool skip = false;
              for (int m = 0; m < c; ++m) {
                if (m == l) continue;
                const bool up = (corner >> m) & 1;
                if (up && frac[m] == 0.0) {
                  skip = true;
                  break;
                }
                wc *= up ? frac[m] : 1.0 - frac[m];
                tg = tg * span + static_cast<std::size_t>(q0[m] + (up ? 1 : 0));
              }
              if (skip || wc == 0.0) continue;
              const double* g = gbuf.data() + tg * np;
              for (std::size_t p = 0; p < np; ++p) o[p] += wc * g[p];
            }
          }
        }
      }
    }
  });
  std::size_t total = 0;
  for (auto k : clamps) total += k;
  return total;
}

PriceField VolterraSolver::picard_step(const PriceField& field) const {
  PriceField next = field;
  std::vector<double> tmp;
  for (int i = 0; i < grid_.time_steps(); ++i) {
    sweep_slice(field, i, tmp, -1);
    next.slice(i) = tmp;
  }
  next.slice(grid_.time_steps()) = initial_field().slice(grid_.time_steps());
  return next;
}

PriceField VolterraSolver::solve(ConvergenceReport& report) const {
  report = ConvergenceReport{};
  report.contraction_bound = bound_;
  PriceField field = initial_field();
  const std::size_t np = grid_.price_count();
  std::vector<double> scale(np);
  for (std::size_t p = 0; p < np; ++p) scale[p] = 1.0 / (1.0 + grid_.price_at(p).lpNorm<1>());
  std::vector<double> tmp;
  for (int k = 1; k <= opts_.max_iter; ++k) {
    double delta = 0.0;
    std::size_t clamps = 0;
    // slices j > i are still the previous iterate while slice i is rebuilt
    for (int i = 0; i < grid_.time_steps(); ++i) {
      clamps += sweep_slice(field, i, tmp, -1);
      auto& sl = field.slice(i);
      for (std::size_t e = 0; e < sl.size(); ++e) {
        delta = std::max(delta, std::abs(tmp[e] - sl[e]) * scale[e % np]);
      }
      sl.swap(tmp);
    }
    report.iterations = k;
    report.age_clamps = clamps;
    if (!report.deltas.empty()) {
      const double prev = report.deltas.back();
      report.ratios.push_back(prev > 0.0 ? delta / prev : 0.0);
    }
    report.deltas.push_back(delta);
    if (delta < opts_.tol) {
      report.converged = true;
      return field;
    }
  }
  throw NoConvergence("Picard iteration did not reach tol " + std::to_string(opts_.tol) + " within " +
                      std::to_string(opts_.max_iter) + " iterations (last step " +
                      std::to_string(report.deltas.back()) + ")");
}

namespace {

// Weighted sum over the stored age tuples around `ages` at slice i.
double apply_at_ages(const PriceField& f, int i, int x, std::span<const double> ages, const HatWeights& hw) {
  const Grid& g = f.grid();
  const int c = g.components();
  std::vector<AgeWeights> yw(c);
  for (int m = 0; m < c; ++m) yw[m] = age_weights(g, i, ages[m]);
  std::vector<int> q(c);
  double total = 0.0;
  for (int corner = 0; corner < (1 << c); ++corner) {
    double w = 1.0;
    for (int m = 0; m < c && w != 0.0; ++m) {
      const bool up = (corner >> m) & 1;
      if (up && yw[m].frac == 0.0) w = 0.0;
      w *= up ? yw[m].frac : 1.0 - yw[m].frac;
      q[m] = yw[m].q0 + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    total += w * apply_weights(hw, g, f.block(i, x, g.age_index(i, q)), f.edges());
  }
  return total;
}

}  // namespace

double VolterraSolver::apply_operator(const PriceField& field, const StatePoint& pt, int asset) const {
  const int c = grid_.components();
  const int n = grid_.assets();
  const double big_t = maturity();
  if (pt.s.size() != n || static_cast<int>(pt.ages.size()) != c) throw Error("evaluate: point has wrong dimensions");
  if (!(pt.t >= 0.0 && pt.t <= big_t)) throw Error("evaluate: t outside [0, T]");
  if (pt.t >= big_t) return asset < 0 ? claim_.payoff(pt.s) : payoff_gradient(claim_, pt.s, asset);
  const int x = pt.regime;
  const auto xs = space_.tuple(x);
  const double r = market_.rate(x);
  const NextJumpLaw law(models_, CsmState{xs, pt.ages});
  const double frozen = asset < 0 ? bsm_price(market_, claim_, x, pt.t, big_t, pt.s, opts_.quad)
                                  : bsm_delta(market_, claim_, x, pt.t, big_t, pt.s, asset, opts_.quad);

  // panels between t and the following grid times
  std::vector<double> cuts{pt.t};
  for (int j = grid_.slice_below(pt.t) + 1; j <= grid_.time_steps(); ++j) {
    if (grid_.time(j) - pt.t > 1e-12 * big_t) cuts.push_back(grid_.time(j));
  }
  const Rule1d& gl = gauss_legendre(opts_.v_nodes);
  std::vector<double> cdf(c, 0.0), jump(c, 0.0);
  std::vector<double> ages(c);
  Eigen::VectorXd mean, mu(n);
  Eigen::MatrixXd cov;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double half = 0.5 * (cuts[k + 1] - cuts[k]), mid = 0.5 * (cuts[k + 1] + cuts[k]);
    for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
      const double u = mid + half * gl.nodes[g];
      const double v = u - pt.t;
      const double wq = half * gl.weights[g];
      market_.integrate(pt.t, v, x, Measure::risk_neutral, mean, cov);
      for (int b = 0; b < n; ++b) mu(b) = std::log(pt.s(b)) + mean(b);
      const HatWeights hw = hat_weights(grid_.lattices(), mu, cov, asset);
      const int lo_slice = grid_.slice_below(u);
      const double wt = lo_slice < grid_.time_steps() ? (u - grid_.time(lo_slice)) / grid_.dt() : 0.0;
      for (int l = 0; l < c; ++l) {
        const double f = law.pdf(l, v);
        cdf[l] += wq * f;
        if (f == 0.0) continue;
        const auto pd = models_[l].transition_probs(xs[l], pt.ages[l] + v);
        for (int m = 0; m < c; ++m) ages[m] = m == l ? 0.0 : pt.ages[m] + v;
        for (int d = 0; d < models_[l].states(); ++d) {
          if (d == xs[l] || pd[d] == 0.0) continue;
          const int x2 = space_.replaced(x, l, d);
          double val = apply_at_ages(field, lo_slice, x2, ages, hw);
          if (wt > 0.0) val = (1.0 - wt) * val + wt * apply_at_ages(field, lo_slice + 1, x2, ages, hw);
          if (asset >= 0) val /= pt.s(asset);
          jump[l] += wq * f * pd[d] * std::exp(-r * v) * val;
        }
      }
    }
  }
  double total = 0.0;
  for (int l = 0; l < c; ++l) total += law.component_prob(l) * (frozen * (1.0 - cdf[l]) + jump[l]);
  return total;
}

double VolterraSolver::evaluate(const PriceField& field, const StatePoint& p) const {
  return apply_operator(field, p, -1);
}

double VolterraSolver::hedge_ratio(const PriceField& field, const StatePoint& p, int asset) const {
  if (asset < 0 || asset >= grid_.assets()) throw Error("hedge_ratio: asset index out of range");
  return apply_operator(field, p, asset);
}

PriceField VolterraSolver::hedge_field(const PriceField& field, int asset) const {
  if (asset < 0 || asset >= grid_.assets()) throw Error("hedge_field: asset index out of range");
  PriceField out(grid_, space_.size(), edges_);
  std::vector<double> tmp;
  for (int i = 0; i < grid_.time_steps(); ++i) {
    sweep_slice(field, i, tmp, asset);
    out.slice(i) = tmp;
  }
  const int m_steps = grid_.time_steps();
  const std::size_t np = grid_.price_count();
  for (int x = 0; x < space_.size(); ++x) {
    for (std::size_t af = 0; af < grid_.age_tuples(m_steps); ++af) {
      auto blk = out.block(m_steps, x, af);
      for (std::size_t p = 0; p < np; ++p) blk[p] = payoff_gradient(claim_, grid_.price_at(p), asset);
    }
  }
  return out;
}

ResidualStats VolterraSolver::pde_residual(const PriceField& field) const {
  const int c = grid_.components();
  const int n = grid_.assets();
  const double big_t = maturity();
  const std::size_t np = grid_.price_count();
  // interior price nodes: central half of the box on every axis
  std::vector<char> inside(np, 1);
  std::vector<int> k(n);
  for (std::size_t p = 0; p < np; ++p) {
    grid_.price_multi(p, k);
    for (int a = 0; a < n; ++a) {
      const Lattice& lat = grid_.lattice(a);
      const double width = (lat.size - 1) * lat.dz;
      const double centre = lat.z0 + 0.5 * width;
      if (k[a] < 1 || k[a] > lat.size - 2 || std::abs(lat.log_node(k[a]) - centre) > 0.25 * width + 1e-12) {
        inside[p] = 0;
      }
    }
  }
  std::vector<std::size_t> stride(n);
  {
    std::size_t s = 1;
    for (int a = n - 1; a >= 0; --a) {
      stride[a] = s;
      s *= grid_.lattice(a).size;
    }
  }
  ResidualStats stats;
  double sum = 0.0;
  std::vector<int> q(c), qt(c);
  std::vector<double> next_ages(c);
  for (int i = 0; i < grid_.time_steps(); ++i) {
    const double t = grid_.time(i);
    if (t > 0.75 * big_t + 1e-12) break;
    for (int x = 0; x < space_.size(); ++x) {
      const auto xs = space_.tuple(x);
      const double r = market_.rate(x);
      const Eigen::MatrixXd diff = market_.diffusion(t, x);
      for (std::size_t af = 0; af < grid_.age_tuples(i); ++af) {
        grid_.age_multi(i, af, q);
        const auto blk = field.block(i, x, af);
        // the characteristic step lands at ages y + dt on slice i + 1
        std::vector<AgeWeights> yw(c);
        for (int m = 0; m < c; ++m) yw[m] = age_weights(grid_, i + 1, grid_.age(q[m]) + grid_.dt());
        for (std::size_t p = 0; p < np; ++p) {
          if (!inside[p]) continue;
          const double phi = blk[p];
          double next = 0.0;
          for (int corner = 0; corner < (1 << c); ++corner) {
            double w = 1.0;
            for (int m = 0; m < c && w != 0.0; ++m) {
              const bool up = (corner >> m) & 1;
              if (up && yw[m].frac == 0.0) w = 0.0;
              w *= up ? yw[m].frac : 1.0 - yw[m].frac;
              qt[m] = yw[m].q0 + (up ? 1 : 0);
            }
            if (w != 0.0) next += w * field.value(i + 1, x, grid_.age_index(i + 1, qt), p);
          }
          double res = (next - phi) / grid_.dt();
          Eigen::VectorXd dz(n), dzz(n);
          for (int a = 0; a < n; ++a) {
            const double h = grid_.lattice(a).dz;
            const double up = blk[p + stride[a]], dn = blk[p - stride[a]];
            dz(a) = (up - dn) / (2.0 * h);
            dzz(a) = (up - 2.0 * phi + dn) / (h * h);
          }
          for (int a = 0; a < n; ++a) {
            res += 0.5 * diff(a, a) * (dzz(a) - dz(a)) + r * dz(a);
            for (int b = a + 1; b < n; ++b) {
              const double ha = grid_.lattice(a).dz, hb = grid_.lattice(b).dz;
              const double cross = (blk[p + stride[a] + stride[b]] - blk[p + stride[a] - stride[b]] -
                                    blk[p - stride[a] + stride[b]] + blk[p - stride[a] - stride[b]]) /
                                   (4.0 * ha * hb);
              res += diff(a, b) * cross;
            }
          }
          res -= r * phi;
          for (int l = 0; l < c; ++l) {
            qt = q;
            qt[l] = 0;
            const std::size_t ai = grid_.age_index(i, qt);
            for (int d = 0; d < models_[l].states(); ++d) {
              if (d == xs[l] || !models_[l].has_rate(xs[l], d)) continue;
              const double lam = models_[l].rate(xs[l], d, grid_.age(q[l]));
              res += lam * (field.value(i, space_.replaced(x, l, d), ai, p) - phi);
            }
          }
          const double scaled = std::abs(res) / (1.0 + grid_.price_at(p).lpNorm<1>());
          stats.max_scaled = std::max(stats.max_scaled, scaled);
          sum += scaled;
          ++stats.points;
        }
      }
    }
  }
  stats.mean_scaled = stats.points ? sum / stats.points : 0.0;
  return stats;
}

}  // namespace smrs
