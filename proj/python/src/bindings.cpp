#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gbwm/core/scenario_io.hpp"
#include "gbwm/core/types.hpp"
#include "gbwm/features/features.hpp"
#include "gbwm/util/rng.hpp"

namespace py = pybind11;
using namespace gbwm;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Goals-based wealth management engine (native core)";

  py::class_<GoalOption>(m, "GoalOption")
      .def(py::init<double, double>(), py::arg("cost"), py::arg("utility"))
      .def_readwrite("cost", &GoalOption::cost)
      .def_readwrite("utility", &GoalOption::utility)
      .def("__repr__", [](const GoalOption& g) {
        return "GoalOption(cost=" + std::to_string(g.cost) +
               ", utility=" + std::to_string(g.utility) + ")";
      });

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("name", &Scenario::name)
      .def_readonly("horizon", &Scenario::T)
      .def_readonly("initial_wealth", &Scenario::W0)
      .def_readonly("infusions", &Scenario::infusions)
      .def("total_utility", &Scenario::total_utility)
      .def("portfolio_count", [](const Scenario& s) { return s.portfolios.size(); })
      .def("goal_times", [](const Scenario& s) {
        std::vector<int> t;
        for (const auto& g : s.goals) t.push_back(g.t);
        return t;
      });

  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("validate_scenario", &validate_scenario, py::arg("scenario"));
  m.def("z_midpoints", &z_midpoints, py::arg("n"));
  m.def("normal_inv_cdf", &normal_inv_cdf, py::arg("p"));
  m.def("build_pareto_front", &build_pareto_front, py::arg("options"));

  m.def("state_vector",
        [](const Scenario& s, int t, double wealth) {
          FeatureContext ctx(s);
          return ctx.state_pre(t, wealth).flat();
        },
        py::arg("scenario"), py::arg("t"), py::arg("wealth"),
        "Policy input vector at (t, wealth) for a scenario without inflation.");
}
