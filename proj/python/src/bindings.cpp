#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tglab/commands.hpp"
#include "tglab/config.hpp"
#include "tglab/error.hpp"
#include "tglab/growth.hpp"
#include "tglab/heralding.hpp"
#include "tglab/leakage.hpp"
#include "tglab/metrics.hpp"
#include "tglab/procedures.hpp"
#include "tglab/tilted_graph.hpp"

namespace py = pybind11;
using namespace tglab;

namespace {

py::dict comparison_dict(const ComparisonReport& r) {
  py::dict d;
  d["p_postselect"] = r.p_postselect;
  d["p_outside_window"] = r.p_outside_window;
  d["p_total"] = r.p_total;
  d["epsilon"] = r.epsilon;
  d["estimated_error"] = r.estimated_error;
  return d;
}

ComparisonMode mode_of(const std::string& s) {
  if (s == "paper") return ComparisonMode::Paper;
  if (s == "exact") return ComparisonMode::Exact;
  throw Error(ErrorKind::Config, "mode must be 'paper' or 'exact'");
}

}  // namespace

PYBIND11_MODULE(_tglab, m) {
  m.doc() = "Tilted graph states grown by double heralding";

  py::register_exception<Error>(m, "TglabError", PyExc_RuntimeError);

  py::class_<LeakageProfile>(m, "LeakageProfile")
      .def_static("critically_damped", &LeakageProfile::critically_damped, py::arg("g"))
      .def_static("tabulated", &LeakageProfile::tabulated, py::arg("times"), py::arg("densities"))
      .def_static("load_csv", &LeakageProfile::load_csv)
      .def("save_csv", &LeakageProfile::save_csv)
      .def("density", &LeakageProfile::density)
      .def("__call__", &LeakageProfile::density)
      .def_property_readonly("total_mass", &LeakageProfile::total_mass)
      .def_property_readonly("coupling", &LeakageProfile::coupling)
      .def_property_readonly("times", &LeakageProfile::times)
      .def_property_readonly("densities", &LeakageProfile::densities);

  m.def("overlap_integral",
        [](const LeakageProfile& a, const LeakageProfile& b) { return overlap_integral(a, b); });

  m.def("expected_f", [](double ta, double tb, const LeakageProfile& a, const LeakageProfile& b) {
    return expected_f(TiltAngle(ta), TiltAngle(tb), a, b).value;
  });
  m.def("expected_f_quadrature",
        [](double ta, double tb, const LeakageProfile& a, const LeakageProfile& b) {
          return expected_f_quadrature(TiltAngle(ta), TiltAngle(tb), a, b).value;
        });
  m.def("expected_f_sq", [](double ta, double tb, const LeakageProfile& a, const LeakageProfile& b) {
    return expected_f_sq(TiltAngle(ta), TiltAngle(tb), a, b).value;
  });
  m.def("series_integrals",
        [](const LeakageProfile& a, const LeakageProfile& b, int order) {
          return series_integrals_i(a, b, order);
        },
        py::arg("pa"), py::arg("pb"), py::arg("order") = 4);
  m.def("fidelity_histogram",
        [](double ta, double tb, const LeakageProfile& a, const LeakageProfile& b, int bins) {
          const FidelityHistogram h = fidelity_histogram(TiltAngle(ta), TiltAngle(tb), a, b, bins);
          return py::make_tuple(h.edges, h.masses);
        },
        py::arg("theta_a"), py::arg("theta_b"), py::arg("pa"), py::arg("pb"), py::arg("bins") = 50);
  m.def("compare_strategies",
        [](const LeakageProfile& a, const LeakageProfile& b, double eps, const std::string& mode) {
          return comparison_dict(compare_strategies(a, b, eps, mode_of(mode)));
        },
        py::arg("pa"), py::arg("pb"), py::arg("epsilon") = 1e-4, py::arg("mode") = "paper");

  m.def("success_probability",
        [](double ta, double tb, double eff) {
          return success_probability(TiltAngle(ta), TiltAngle(tb), eff);
        },
        py::arg("theta_a"), py::arg("theta_b"), py::arg("efficiency") = 1.0);
  m.def("p_success", &p_success);
  m.def("failure_function", &failure_function);

  py::class_<TiltedGraph>(m, "TiltedGraph")
      .def(py::init<>())
      .def_static("from_text", &TiltedGraph::from_text)
      .def("to_text", &TiltedGraph::to_text)
      .def("__len__", &TiltedGraph::size)
      .def("vertex_ids", &TiltedGraph::vertex_ids)
      .def("neighbours", &TiltedGraph::neighbours)
      .def("canonicalize", [](const TiltedGraph& g) { return canonicalize(g); });

  m.def("command_names", &command_names);
  m.def("run_command",
        [](const std::string& command, const std::string& config_path, const std::string& out_dir,
           std::optional<std::uint64_t> seed) {
          ExperimentConfig cfg = parse_config(config_path);
          if (seed) cfg.set_seed(*seed);
          const CommandOutput out = run_command(parse_command(command), cfg, out_dir);
          return py::make_tuple(out.exit_code, out.files, out.report);
        },
        py::arg("command"), py::arg("config"), py::arg("out") = ".", py::arg("seed") = py::none());
  m.def("verify", [](int cases, std::uint64_t seed) {
    return run_oracle_suite(cases, seed).max_discrepancy();
  }, py::arg("cases") = 200, py::arg("seed") = 1);
}
