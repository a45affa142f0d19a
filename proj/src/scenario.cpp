#include "smrs/scenario.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "smrs/error.hpp"

namespace smrs {

using json = nlohmann::ordered_json;

std::string to_string(Output o) {
  switch (o) {
    case Output::price_field: return "price-field";
    case Output::hedge_field: return "hedge-field";
    case Output::mc_check: return "mc-check";
    case Output::pde_residual: return "pde-residual";
    case Output::sensitivity: return "sensitivity";
    case Output::residual_risk: return "residual-risk";
  }
  return "?";
}

Grid Scenario::build_grid() const {
  std::vector<Eigen::VectorXd> anchors;
  for (const auto& p : points) anchors.push_back(p.s);
  return Grid::build(market, maturity, grid, static_cast<int>(hazards.size()), anchors);
}

namespace {

// A json value together with its dotted location, for error messages.
struct Node {
  const json& v;
  std::string where;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(where, what); }

  bool has(const char* key) const { return v.is_object() && v.contains(key); }
  Node at(const char* key) const {
    if (!v.is_object()) fail("expected an object");
    if (!v.contains(key)) throw ConfigError(join(key), "missing required field");
    return {v.at(key), join(key)};
  }
  Node at(std::size_t k) const { return {v.at(k), where + "[" + std::to_string(k) + "]"}; }
  std::size_t size() const {
    if (!v.is_array()) fail("expected an array");
    return v.size();
  }
  std::string join(const char* key) const { return where.empty() ? key : where + "." + key; }

  double num() const {
    if (!v.is_number()) fail("expected a number");
    return v.get<double>();
  }
  int integer() const {
    if (!v.is_number_integer()) fail("expected an integer");
    return v.get<int>();
  }
  std::uint64_t u64() const {
    if (!v.is_number_unsigned()) fail("expected a non-negative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!v.is_boolean()) fail("expected true or false");
    return v.get<bool>();
  }
  std::string str() const {
    if (!v.is_string()) fail("expected a string");
    return v.get<std::string>();
  }
  std::vector<double> nums() const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k).num();
    return out;
  }
  std::vector<int> ints() const {
    std::vector<int> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k).integer();
    return out;
  }
};

// Scalar, vector (column), or matrix (array of rows).
Eigen::MatrixXd read_matrix(const Node& n) {
  if (n.v.is_number()) return Eigen::MatrixXd::Constant(1, 1, n.num());
  const std::size_t rows = n.size();
  if (rows == 0) n.fail("empty array");
  if (n.v[0].is_number()) {
    const auto vals = n.nums();
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  const std::size_t cols = n.at(std::size_t{0}).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = n.at(r).nums();
    if (row.size() != cols) n.at(r).fail("ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

TimeSeries read_series(const Node& n) {
  if (n.v.is_object()) {
    const auto knots = n.at("knots").nums();
    const Node vals = n.at("values");
    std::vector<Eigen::MatrixXd> values;
    for (std::size_t k = 0; k < vals.size(); ++k) values.push_back(read_matrix(vals.at(k)));
    try {
      return TimeSeries(knots, values);
    } catch (const ValidationError& e) {
      n.fail(e.what());
    }
  }
  return TimeSeries(read_matrix(n));
}

void check_shape(const Node& n, const TimeSeries& s, int rows, int cols, const char* what) {
  for (const auto& m : s.values()) {
    if (m.rows() != rows || m.cols() != cols) {
      n.fail(std::string(what) + " must be " + std::to_string(rows) + " x " + std::to_string(cols));
    }
  }
}

Coefficient read_coefficient(const Node& n, const RegimeSpace& space, int rows, int cols, const char* what) {
  if (n.has("per_regime")) {
    const Node list = n.at("per_regime");
    if (static_cast<int>(list.size()) != space.size()) {
      list.fail("needs one entry per regime tuple (" + std::to_string(space.size()) + ")");
    }
    std::vector<TimeSeries> series;
    for (std::size_t k = 0; k < list.size(); ++k) {
      series.push_back(read_series(list.at(k)));
      check_shape(list.at(k), series.back(), rows, cols, what);
    }
    return Coefficient::per_regime(std::move(series));
  }
  for (const char* rule : {"sum", "product"}) {
    if (!n.has(rule)) continue;
    const Node list = n.at(rule);
    if (static_cast<int>(list.size()) != space.components()) list.fail("needs one entry per component");
    std::vector<std::vector<TimeSeries>> terms(list.size());
    for (std::size_t l = 0; l < list.size(); ++l) {
      const Node row = list.at(l);
      if (static_cast<int>(row.size()) != space.states(static_cast<int>(l))) {
        row.fail("needs one entry per state of component " + std::to_string(l));
      }
      for (std::size_t j = 0; j < row.size(); ++j) {
        terms[l].push_back(read_series(row.at(j)));
        check_shape(row.at(j), terms[l].back(), rows, cols, what);
      }
    }
    return Coefficient::factored(std::string(rule) == "sum" ? Coefficient::Combine::sum
                                                             : Coefficient::Combine::product,
                                 std::move(terms));
  }
  const TimeSeries s = read_series(n);
  check_shape(n, s, rows, cols, what);
  return Coefficient::per_regime({s});
}

RateFunction read_rate(const Node& n) {
  const std::string family = n.at("family").str();
  if (family == "constant") return RateFunction::constant(n.at("c").num());
  if (family == "affine") return RateFunction::affine(n.at("a").num(), n.at("b").num());
  if (family == "weibull") return RateFunction::weibull(n.at("c").num(), n.at("kappa").num());
  if (family == "tabulated") return RateFunction::tabulated(n.at("knots").nums(), n.at("values").nums());
  n.at("family").fail("unknown hazard family '" + family + "'");
}

HazardModel read_hazard(const Node& n, int l) {
  const int states = n.at("states").integer();
  if (states < 1) n.at("states").fail("must be >= 1");
  std::vector<std::vector<std::optional<RateFunction>>> table(states, std::vector<std::optional<RateFunction>>(states));
  const Node rates = n.at("rates");
  for (std::size_t k = 0; k < rates.size(); ++k) {
    const Node r = rates.at(k);
    const int i = r.at("from").integer(), j = r.at("to").integer();
    const std::string pair = "(l=" + std::to_string(l) + ", i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")";
    if (i < 1 || i > states || j < 1 || j > states || i == j) r.fail("invalid state pair " + pair);
    if (table[i - 1][j - 1]) r.fail("duplicate rate for " + pair);
    try {
      table[i - 1][j - 1] = read_rate(r);
    } catch (const ConfigError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ConfigError(r.where, std::string(e.what()) + " for " + pair);
    }
  }
  try {
    return HazardModel(states, std::move(table));
  } catch (const ValidationError& e) {
    throw ConfigError(n.where, std::string(e.what()) + " (component l=" + std::to_string(l) + ")");
  }
}

Claim read_claim(const Node& n) {
  const std::string kind = n.at("kind").str();
  const auto weights = n.at("weights").nums();
  try {
    if (kind == "basket_call") return Claim::basket_call(weights, n.at("strike").num());
    if (kind == "basket_put") return Claim::basket_put(weights, n.at("strike").num());
    if (kind == "linear") return Claim::linear(weights);
    if (kind == "piecewise_linear") {
      return Claim::piecewise_linear(weights, n.at("knots").nums(), n.at("values").nums(),
                                     n.at("left_slope").num(), n.at("right_slope").num());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ValidationError& e) {
    n.fail(e.what());
  }
  n.at("kind").fail("unknown claim kind '" + kind + "'");
}

// Reads json[key] or stores the default there so the echo is complete.
template <class T, class Get>
T setting(json& section, const std::string& where, const char* key, T fallback, Get get) {
  if (!section.contains(key)) section[key] = fallback;
  return get(Node{section[key], where + "." + key});
}

std::vector<int> regime_tuple(const Node& n, const RegimeSpace& space) {
  const auto x = n.ints();
  if (static_cast<int>(x.size()) != space.components()) n.fail("needs one state per component");
  std::vector<int> zero(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (x[l] < 1 || x[l] > space.states(static_cast<int>(l))) n.fail("state out of range (states are 1-based)");
    zero[l] = x[l] - 1;
  }
  return zero;
}

void apply_overrides(json& root) {
  struct Key {
    const char* section;
    const char* key;
    bool integer;
  };
  static constexpr Key keys[] = {
      {"solver", "tol", false},        {"solver", "max_iter", true},  {"solver", "v_nodes", true},
      {"solver", "hermite_nodes", true}, {"solver", "sparse_level", true}, {"mc", "paths", true},
      {"mc", "seed", true},
  };
  for (const Key& k : keys) {
    std::string name = std::string(kEnvPrefix) + k.section + "_" + k.key;
    for (char& ch : name) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    const char* raw = std::getenv(name.c_str());
    if (!raw) continue;
    std::istringstream is(raw);
    if (k.integer) {
      long long v = 0;
      if (!(is >> v) || !is.eof() || v < 0) throw ConfigError(name, "expected a non-negative integer");
      root[k.section][k.key] = static_cast<std::uint64_t>(v);
    } else {
      double v = 0.0;
      if (!(is >> v) || !is.eof()) throw ConfigError(name, "expected a number");
      root[k.section][k.key] = v;
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, bool apply_env) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t k = 0; k < std::min<std::size_t>(e.byte, text.size()); ++k) line += text[k] == '\n';
    throw ConfigError("line " + std::to_string(line), "malformed JSON");
  }
  if (!root.is_object()) throw ConfigError("", "top level must be an object");
  if (apply_env) apply_overrides(root);
  const Node top{root, ""};

  const std::string name = root.contains("name") ? top.at("name").str() : "scenario";
  const double maturity = top.at("maturity").num();
  if (!(maturity > 0.0)) top.at("maturity").fail("must be positive");

  // regime space from the hazard sections
  const Node hz = top.at("hazards");
  if (hz.size() == 0) hz.fail("needs at least one component");
  std::vector<HazardModel> hazards;
  std::vector<int> radix;
  for (std::size_t l = 0; l < hz.size(); ++l) {
    hazards.push_back(read_hazard(hz.at(l), static_cast<int>(l)));
    radix.push_back(hazards.back().states());
  }
  RegimeSpace space(radix);

  const Node mk = top.at("market");
  const int n = mk.at("assets").integer();
  if (n < 1) mk.at("assets").fail("must be >= 1");
  Coefficient rate = read_coefficient(mk.at("rate"), space, 1, 1, "rate");
  Coefficient drift = read_coefficient(mk.at("drift"), space, n, 1, "drift");
  Coefficient vol = read_coefficient(mk.at("vol"), space, n, n, "vol");
  std::optional<MarketModel> market;
  try {
    market.emplace(space, n, std::move(rate), std::move(drift), std::move(vol));
  } catch (const ValidationError& e) {
    mk.fail(e.what());
  }

  Claim claim = read_claim(top.at("claim"));
  if (claim.assets() != n) top.at("claim").at("weights").fail("needs one weight per asset");
  try {
    claim.validate();
  } catch (const ValidationError& e) {
    top.at("claim").fail(e.what());
  }

  GridSpec gs;
  {
    json& g = root["grid"];
    if (!g.is_object()) g = json::object();
    gs.time_steps = setting(g, "grid", "time_steps", gs.time_steps, [](const Node& x) { return x.integer(); });
    gs.price_nodes = setting(g, "grid", "price_nodes", gs.price_nodes, [](const Node& x) { return x.integer(); });
    gs.age_nodes = setting(g, "grid", "age_nodes", gs.age_nodes, [](const Node& x) { return x.integer(); });
    gs.width_sd = setting(g, "grid", "width_sd", gs.width_sd, [](const Node& x) { return x.num(); });
    if (gs.time_steps < 1) throw ConfigError("grid.time_steps", "must be >= 1");
    if (gs.price_nodes < 3) throw ConfigError("grid.price_nodes", "must be >= 3");
    if (gs.age_nodes < 2) throw ConfigError("grid.age_nodes", "must be >= 2");
    if (!(gs.width_sd > 0.0)) throw ConfigError("grid.width_sd", "must be positive");
  }
  SolverOptions so;
  {
    json& s = root["solver"];
    if (!s.is_object()) s = json::object();
    so.tol = setting(s, "solver", "tol", so.tol, [](const Node& x) { return x.num(); });
    so.max_iter = setting(s, "solver", "max_iter", so.max_iter, [](const Node& x) { return x.integer(); });
    so.v_nodes = setting(s, "solver", "v_nodes", so.v_nodes, [](const Node& x) { return x.integer(); });
    so.quad.hermite_nodes =
        setting(s, "solver", "hermite_nodes", so.quad.hermite_nodes, [](const Node& x) { return x.integer(); });
    so.quad.sparse_level =
        setting(s, "solver", "sparse_level", so.quad.sparse_level, [](const Node& x) { return x.integer(); });
    if (!(so.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
    if (so.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
    if (so.v_nodes < 1) throw ConfigError("solver.v_nodes", "must be >= 1");
  }

  std::set<Output> outputs;
  {
    if (!root.contains("outputs")) root["outputs"] = json::array({"price-field"});
    const Node list{root["outputs"], "outputs"};
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string o = list.at(k).str();
      bool known = false;
      for (Output cand : {Output::price_field, Output::hedge_field, Output::mc_check, Output::pde_residual,
                          Output::sensitivity, Output::residual_risk}) {
        if (to_string(cand) == o) {
          outputs.insert(cand);
          known = true;
        }
      }
      if (!known) list.at(k).fail("unknown output '" + o + "'");
    }
  }

  McSettings mc;
  {
    json& m = root["mc"];
    if (!m.is_object()) m = json::object();
    mc.paths = setting(m, "mc", "paths", static_cast<std::uint64_t>(mc.paths), [](const Node& x) { return x.u64(); });
    mc.antithetic = setting(m, "mc", "antithetic", mc.antithetic, [](const Node& x) { return x.boolean(); });
    if (m.contains("seed")) mc.seed = Node{m["seed"], "mc.seed"}.u64();
    const bool stochastic = outputs.count(Output::mc_check) || outputs.count(Output::residual_risk);
    if (stochastic && !mc.seed) throw ConfigError("mc.seed", "required when mc-check or residual-risk is requested");
    if (stochastic && mc.paths < 100) throw ConfigError("mc.paths", "must be >= 100");
    if (mc.antithetic && mc.paths % 2 != 0) throw ConfigError("mc.paths", "must be even with antithetic sampling");
  }

  std::vector<StatePoint> points;
  {
    const Node list = top.at("points");
    if (list.size() == 0) list.fail("needs at least one evaluation point");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Node p = list.at(k);
      StatePoint sp;
      sp.t = p.has("t") ? p.at("t").num() : 0.0;
      if (!(sp.t >= 0.0 && sp.t < maturity)) p.fail("t must lie in [0, maturity)");
      const auto s = p.at("s").nums();
      if (static_cast<int>(s.size()) != n) p.at("s").fail("needs one price per asset");
      sp.s = Eigen::Map<const Eigen::VectorXd>(s.data(), n);
      if ((sp.s.array() <= 0.0).any()) p.at("s").fail("prices must be positive");
      sp.regime = space.index(regime_tuple(p.at("x"), space));
      sp.ages = p.has("y") ? p.at("y").nums() : std::vector<double>(space.components(), 0.0);
      if (static_cast<int>(sp.ages.size()) != space.components()) p.at("y").fail("needs one age per component");
      for (double y : sp.ages) {
        if (!(y >= 0.0 && y <= maturity)) p.at("y").fail("ages must lie in [0, maturity]");
      }
      points.push_back(std::move(sp));
    }
  }

  std::vector<double> perturbations{1.1, 1.5};
  {
    json& s = root["sensitivity"];
    if (!s.is_object()) s = json::object();
    if (!s.contains("scales")) s["scales"] = perturbations;
    perturbations = Node{s["scales"], "sensitivity.scales"}.nums();
    for (double f : perturbations) {
      if (!(f > 0.0)) throw ConfigError("sensitivity.scales", "scale factors must be positive");
    }
  }

  std::vector<SurfaceSpec> surfaces;
  {
    if (!root.contains("surfaces")) {
      json list = json::array();
      for (int x = 0; x < space.size(); ++x) {
        json tup = json::array();
        for (int v : space.tuple(x)) tup.push_back(v + 1);
        list.push_back({{"t", 0.0}, {"x", tup}, {"y", std::vector<double>(space.components(), 0.0)}});
      }
      root["surfaces"] = list;
    }
    const Node list{root["surfaces"], "surfaces"};
    for (std::size_t k = 0; k < list.size(); ++k) {
      const Node p = list.at(k);
      SurfaceSpec sf;
      sf.t = p.has("t") ? p.at("t").num() : 0.0;
      if (!(sf.t >= 0.0 && sf.t <= maturity)) p.fail("t must lie in [0, maturity]");
      sf.regime = space.index(regime_tuple(p.at("x"), space));
      sf.ages = p.at("y").nums();
      if (static_cast<int>(sf.ages.size()) != space.components()) p.at("y").fail("needs one age per component");
      surfaces.push_back(std::move(sf));
    }
  }

  Scenario sc{name,   maturity,        std::move(*market), std::move(hazards), std::move(claim),
              gs,     so,              mc,                 std::move(points),  std::move(outputs),
              std::move(perturbations), std::move(surfaces), ""};
  // grid checks run through the builder, then sigma is checked on the time grid
  std::vector<double> times;
  try {
    const Grid g = sc.build_grid();
    for (int i = 0; i <= g.time_steps(); ++i) times.push_back(g.time(i));
  } catch (const ValidationError& e) {
    throw ConfigError("", e.what());  // the builder's message already starts with "grid:"
  }
  try {
    sc.market.validate(times);
  } catch (const ValidationError& e) {
    throw ConfigError("market.vol", e.what());
  }
  sc.resolved = root.dump(2);
  return sc;
}

Scenario load_scenario(const std::string& path, bool apply_env) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), apply_env);
}

}  // namespace smrs
