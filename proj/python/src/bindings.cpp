#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>
#include <vector>

#include "smrs/acceptance.hpp"
#include "smrs/error.hpp"
#include "smrs/hedging.hpp"
#include "smrs/pipeline.hpp"
#include "smrs/scenario.hpp"

namespace py = pybind11;

namespace {

// Owns the scenario and grid the solver refers to.
class Solution {
 public:
  Solution(const std::string& text, int threads)
      : sc_(smrs::parse_scenario(text)), grid_(sc_.build_grid()),
        solver_(sc_.market, sc_.claim, sc_.hazards, grid_, [&] {
          smrs::SolverOptions so = sc_.solver;
          so.threads = threads;
          return so;
        }()) {
    py::gil_scoped_release quiet;
    phi_ = std::make_unique<smrs::PriceField>(solver_.solve(conv_));
  }

  double price(double t, const std::vector<double>& s, const std::vector<int>& x, const std::vector<double>& y) const {
    return solver_.evaluate(*phi_, point(t, s, x, y));
  }

  py::dict strategy(double t, const std::vector<double>& s, const std::vector<int>& x,
                    const std::vector<double>& y) const {
    const smrs::Strategy st = smrs::strategy_at(solver_, *phi_, point(t, s, x, y));
    py::dict d;
    d["price"] = st.price;
    d["xi"] = std::vector<double>(st.xi.data(), st.xi.data() + st.xi.size());
    d["epsilon"] = st.epsilon;
    return d;
  }

  int iterations() const { return conv_.iterations; }
  std::vector<double> ratios() const { return conv_.ratios; }
  double contraction_bound() const { return conv_.contraction_bound; }
  const std::string& name() const { return sc_.name; }

 private:
  // x arrives 1-based, as in the configuration files
  smrs::StatePoint point(double t, const std::vector<double>& s, const std::vector<int>& x,
                         const std::vector<double>& y) const {
    const auto& space = sc_.market.regimes();
    if (static_cast<int>(x.size()) != space.components() || y.size() != x.size()) {
      throw smrs::ConfigError("x, y", "need one entry per component");
    }
    if (static_cast<int>(s.size()) != sc_.market.assets()) throw smrs::ConfigError("s", "wrong number of assets");
    std::vector<int> zero(x.size());
    for (std::size_t l = 0; l < x.size(); ++l) {
      if (x[l] < 1 || x[l] > space.states(static_cast<int>(l))) throw smrs::ConfigError("x", "state out of range");
      zero[l] = x[l] - 1;
    }
    smrs::StatePoint p;
    p.t = t;
    p.s = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    p.regime = space.index(zero);
    p.ages = y;
    return p;
  }

  smrs::Scenario sc_;
  smrs::Grid grid_;
  smrs::VolterraSolver solver_;
  smrs::ConvergenceReport conv_;
  std::unique_ptr<smrs::PriceField> phi_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the regime-switching Volterra pricer";
  m.attr("__version__") = SMRS_VERSION;

  auto base = py::register_exception<smrs::Error>(m, "SmrsError", PyExc_RuntimeError);
  auto invalid = py::register_exception<smrs::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<smrs::ConfigError>(m, "ConfigError", invalid.ptr());
  py::register_exception<smrs::NoConvergence>(m, "NoConvergence", base.ptr());

  m.def("describe_grid", [](const std::string& text) { return smrs::describe_grid(smrs::parse_scenario(text)); },
        py::arg("config"), "Resolved grid of a JSON scenario, as JSON text.");
  m.def("resolve", [](const std::string& text) { return smrs::parse_scenario(text).resolved; }, py::arg("config"),
        "The scenario with every default filled in.");
  m.def(
      "run",
      [](const std::string& text, const std::string& out_dir, int threads) {
        const smrs::Scenario sc = smrs::parse_scenario(text);
        py::gil_scoped_release quiet;
        return smrs::run_scenario(sc, smrs::RunOptions{out_dir, threads}).report;
      },
      py::arg("config"), py::arg("out_dir"), py::arg("threads") = 1,
      "Solves a scenario, writes its outputs and returns report.json.");
  m.def(
      "selftest",
      [](std::vector<int> only, int threads) {
        smrs::AcceptanceSummary sum;
        {
          py::gil_scoped_release quiet;
          sum = smrs::run_acceptance(smrs::AcceptanceOptions{threads, std::move(only)});
        }
        return py::make_tuple(sum.all_passed, sum.table, sum.report);
      },
      py::arg("only") = std::vector<int>{}, py::arg("threads") = 1,
      "Runs acceptance criteria; returns (passed, table, report_json).");

  py::class_<Solution>(m, "Solution")
      .def(py::init<const std::string&, int>(), py::arg("config"), py::arg("threads") = 1)
      .def("price", &Solution::price, py::arg("t"), py::arg("s"), py::arg("x"), py::arg("y"))
      .def("strategy", &Solution::strategy, py::arg("t"), py::arg("s"), py::arg("x"), py::arg("y"))
      .def_property_readonly("iterations", &Solution::iterations)
      .def_property_readonly("ratios", &Solution::ratios)
      .def_property_readonly("contraction_bound", &Solution::contraction_bound)
      .def_property_readonly("name", &Solution::name);
}
