#include "smrs/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "smrs/analysis.hpp"
#include "smrs/error.hpp"
#include "smrs/format.hpp"
#include "smrs/hedging.hpp"
#include "smrs/mc_oracle.hpp"
#include "smrs/regime_bsm.hpp"

namespace smrs {

using json = nlohmann::ordered_json;

namespace {

json tuple_json(const RegimeSpace& space, int regime) {
  json out = json::array();
  for (int v : space.tuple(regime)) out.push_back(v + 1);
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

json point_json(const RegimeSpace& space, const StatePoint& p) {
  return {{"t", p.t}, {"s", vector_json(p.s)}, {"x", tuple_json(space, p.regime)}, {"y", p.ages}};
}

json convergence_json(const ConvergenceReport& r) {
  bool below = true;
  for (double q : r.ratios) below = below && q < 1.0;
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"deltas", r.deltas},
          {"ratios", r.ratios},
          {"contraction_bound", r.contraction_bound},
          {"ratios_below_one", below},
          {"age_clamps", r.age_clamps}};
}

std::string join_label(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? "-" : "") + parts[k];
  return out;
}

std::string surface_name(const RegimeSpace& space, const SurfaceSpec& sf) {
  std::vector<std::string> xs, ys;
  for (int v : space.tuple(sf.regime)) xs.push_back(std::to_string(v + 1));
  for (double y : sf.ages) ys.push_back(format_number(y));
  std::string name = "surface_" + join_label(xs) + "_" + join_label(ys);
  if (sf.t != 0.0) name += "_t" + format_number(sf.t);
  return name + ".csv";
}

class Writer {
 public:
  explicit Writer(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  template <class F>
  void file(const std::string& name, F&& body) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    body(os);
    if (!os) throw Error("write failed for " + path.string());
    written_.push_back(path.string());
  }
  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

}  // namespace

std::string describe_grid(const Scenario& sc) {
  const Grid g = sc.build_grid();
  json axes = json::array();
  for (int a = 0; a < g.assets(); ++a) {
    const Lattice& lat = g.lattice(a);
    axes.push_back({{"asset", a + 1}, {"nodes", lat.size}, {"s_min", lat.lower()}, {"s_max", lat.upper()},
                    {"dlog", lat.dz}});
  }
  const std::size_t per_slice = static_cast<std::size_t>(sc.market.regimes().size()) * g.price_count();
  std::size_t values = 0;
  for (int i = 0; i <= g.time_steps(); ++i) values += per_slice * g.age_tuples(i);
  json out = {{"scenario", sc.name},
              {"maturity", sc.maturity},
              {"time_steps", g.time_steps()},
              {"dt", g.dt()},
              {"age_nodes", g.age_nodes()},
              {"components", g.components()},
              {"regimes", sc.market.regimes().size()},
              {"price_axes", axes},
              {"stored_values", values}};
  return out.dump(2) + "\n";
}

std::string error_report(const std::string& kind, const std::string& message) {
  json out = {{"status", "error"}, {"error", {{"kind", kind}, {"message", message}}}};
  return out.dump(2) + "\n";
}

RunResult run_scenario(const Scenario& sc, const RunOptions& opts) {
  const RegimeSpace& space = sc.market.regimes();
  Writer out(opts.out_dir);
  SolverOptions so = sc.solver;
  so.threads = opts.threads;
  const Grid grid = sc.build_grid();
  const VolterraSolver solver(sc.market, sc.claim, sc.hazards, grid, so);

  json report;
  report["status"] = "ok";
  report["version"] = SMRS_VERSION;
  report["scenario"] = sc.name;
  report["config"] = json::parse(sc.resolved);
  report["grid"] = json::parse(describe_grid(sc));

  ConvergenceReport conv;
  const PriceField phi = solver.solve(conv);
  report["convergence"] = convergence_json(conv);
  report["envelope"] = {{"c1", vector_json(sc.claim.c1())},
                        {"c2", sc.claim.c2()},
                        {"max_distance", linear_growth_distance(phi, solver.initial_field())},
                        {"max_deviation_from_c1s", [&] {
                           double worst = 0.0;
                           for (int i = 0; i <= grid.time_steps(); ++i) {
                             const auto& sl = phi.slice(i);
                             const std::size_t np = grid.price_count();
                             for (std::size_t k = 0; k < sl.size(); ++k) {
                               worst = std::max(worst, std::abs(sl[k] - sc.claim.c1().dot(grid.price_at(k % np))));
                             }
                           }
                           return worst;
                         }()}};

  json points = json::array();
  for (const StatePoint& p : sc.points) {
    const Strategy st = strategy_at(solver, phi, p);
    json row = point_json(space, p);
    row["price"] = st.price;
    row["xi"] = vector_json(st.xi);
    row["epsilon"] = st.epsilon;
    row["frozen_price"] = bsm_price(sc.market, sc.claim, p.regime, p.t, sc.maturity, p.s, so.quad);
    points.push_back(row);
  }
  report["points"] = points;

  if (sc.wants(Output::price_field)) {
    out.file("price_field.csv", [&](std::ostream& os) { phi.write_csv(os, space, "phi"); });
  }
  if (sc.wants(Output::hedge_field)) {
    const HedgeField hf = build_hedge_field(solver, phi);
    report["hedge_field"] = {{"max_abs_xi", hf.max_abs_xi()}, {"lipschitz", sc.claim.lipschitz()}};
    out.file("hedge_field.csv", [&](std::ostream& os) { hf.write_csv(os, space); });
  }
  for (const SurfaceSpec& sf : sc.surfaces) {
    out.file(surface_name(space, sf), [&](std::ostream& os) {
      for (int a = 0; a < grid.assets(); ++a) os << (a ? "," : "") << 's' << a + 1;
      os << ",phi\n";
      for (std::size_t p = 0; p < grid.price_count(); ++p) {
        const Eigen::VectorXd s = grid.price_at(p);
        for (int a = 0; a < grid.assets(); ++a) os << (a ? "," : "") << format_number(s(a));
        os << ',' << format_number(phi.interpolate(sf.t, s, sf.regime, sf.ages)) << '\n';
      }
    });
  }
  if (sc.wants(Output::pde_residual)) {
    const ResidualStats rs = solver.pde_residual(phi);
    report["pde_residual"] = {{"max_scaled", rs.max_scaled}, {"mean_scaled", rs.mean_scaled}, {"points", rs.points}};
  }
  McOptions mc;
  mc.paths = sc.mc.paths;
  mc.seed = sc.mc.seed.value_or(0);
  mc.antithetic = sc.mc.antithetic;
  mc.threads = opts.threads;
  if (sc.wants(Output::mc_check)) {
    json rows = json::array();
    for (std::size_t k = 0; k < sc.points.size(); ++k) {
      const StatePoint& p = sc.points[k];
      McOptions per = mc;
      per.seed = mc.seed + k;  // one stream family per point
      const McEstimate est = mc_price(sc.market, sc.claim, sc.hazards, p, sc.maturity, per);
      const double v = points[k]["price"].get<double>();
      const double z = est.std_error > 0.0 ? (v - est.estimate) / est.std_error : 0.0;
      json row = point_json(space, p);
      row.update({{"volterra", v},
                  {"mc", est.estimate},
                  {"std_error", est.std_error},
                  {"z", z},
                  {"within_3se", std::abs(z) <= 3.0},
                  {"paths", est.paths},
                  {"seed", per.seed}});
      rows.push_back(row);
    }
    report["mc_check"] = rows;
  }
  if (sc.wants(Output::residual_risk)) {
    const ResidualRiskReport rr = residual_risk(sc.market, sc.hazards, phi, sc.points.front(), mc);
    report["residual_risk"] = {{"start", point_json(space, sc.points.front())},
                               {"estimate", rr.estimate},
                               {"std_error", rr.std_error},
                               {"paths", rr.paths},
                               {"mean_jumps", rr.mean_jumps},
                               {"seed", mc.seed}};
  }
  if (sc.wants(Output::sensitivity)) {
    json rows = json::array();
    for (double f : sc.perturbations) {
      std::vector<HazardModel> tilde;
      for (const auto& h : sc.hazards) tilde.push_back(h.scaled(f));
      const SensitivityReport s = sensitivity_check(sc.market, sc.claim, sc.hazards, tilde, grid, so);
      rows.push_back({{"scale", f},
                      {"lambda_sup", s.lambda_sup},
                      {"lambda_sum", s.lambda_sum},
                      {"phi_sup", s.phi_sup},
                      {"bound", s.bound},
                      {"slack", s.slack},
                      {"ratio", s.ratio},
                      {"satisfied", s.satisfied}});
    }
    report["sensitivity"] = rows;
  }

  RunResult res;
  res.report = report.dump(2) + "\n";
  out.file("report.json", [&](std::ostream& os) { os << res.report; });
  res.files = out.written();
  return res;
}

}  // namespace smrs
