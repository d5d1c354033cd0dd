#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mocp/cli.hpp"
#include "mocp/io.hpp"
#include "mocp/registry.hpp"
#include "mocp/solver.hpp"
#include "mocp/transform.hpp"

namespace py = pybind11;
using namespace mocp;

namespace {

// Problems cross the boundary as JSON text; reports come back as JSON text
// and are decoded on the python side.
BolzaProblem problem_of(const std::string& text) {
  return build_problem(io::problem_from_json(io::parse_json(text, "problem")));
}

std::string solve_json(const std::string& problem, const Vec& weights, std::size_t max_iters,
                       std::size_t steps, bool trajectories) {
  const auto prob = problem_of(problem);
  SolverConfig cfg;
  cfg.fbsm.max_iters = max_iters;
  cfg.fbsm.steps = steps;
  ParetoPoint pt;
  {
    py::gil_scoped_release release;
    pt = solve_scalarized(prob, weights, cfg);
  }
  return io::to_json(pt, trajectories).dump();
}

std::string front_json(const std::string& problem, int grid, unsigned jobs) {
  const auto prob = problem_of(problem);
  SolverConfig cfg;
  cfg.jobs = jobs;
  ParetoFront front;
  {
    py::gil_scoped_release release;
    front = sweep_front(prob, weight_grid(prob.l(), std::max(grid - 1, 1)), cfg);
  }
  return io::to_json(front).dump();
}

std::string check_json(const std::string& problem, const std::string& trajectory) {
  const auto prob = problem_of(problem);
  const auto j = io::parse_json(trajectory, "trajectory");
  const auto proc = io::process_from_json(j);
  const MultiplierSet mult = j.contains("multipliers")
                                 ? io::multipliers_from_json(j.at("multipliers"))
                                 : recover_multipliers(prob, proc, Gauge::unit()).multipliers;
  io::json out{{"admissibility", io::to_json(check_admissible(prob, proc))},
               {"multipliers", io::to_json(mult, false)},
               {"conditions", io::to_json(check_conditions(prob, proc, mult))}};
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiobjective optimal control core";
  m.attr("__version__") = io::kToolVersion;

  py::register_exception<io::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ProblemError>(m, "ProblemError", PyExc_ValueError);
  py::register_exception<expr::ParseError>(m, "ExpressionError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("registry_names", &registry_names);
  m.def("registry_problem_json", [](const std::string& name) {
    return io::problem_to_json(registry_spec(name)).dump();
  });
  m.def("normalize_problem_json", [](const std::string& text) {
    return io::problem_to_json(problem_of(text)).dump();
  }, "Parse, validate and re-emit a problem file.");
  m.def("problem_hash", [](const std::string& text) {
    return io::problem_hash(io::problem_from_json(io::parse_json(text, "problem")));
  });
  m.def("mayer_json", [](const std::string& text) {
    return io::problem_to_json(bolza_to_mayer(problem_of(text))).dump();
  });
  m.def("solve_json", &solve_json, py::arg("problem"), py::arg("weights"),
        py::arg("max_iters") = FbsmConfig{}.max_iters, py::arg("steps") = FbsmConfig{}.steps,
        py::arg("trajectories") = false);
  m.def("front_json", &front_json, py::arg("problem"), py::arg("grid") = 11, py::arg("jobs") = 1);
  m.def("check_json", &check_json, py::arg("problem"), py::arg("trajectory"));
  m.def("weight_grid", &weight_grid, py::arg("l"), py::arg("divisions") = 10, py::arg("cap") = 500);
  m.def("dominance_filter", [](const std::vector<Vec>& objectives, double tol) {
    const auto f = dominance_filter(objectives, tol);
    return py::make_tuple(f.dominated, f.weakly_dominated);
  }, py::arg("objectives"), py::arg("dom_tol") = 1e-9);
  m.def("hamiltonian", [](const std::string& problem, double t, const Vec& x, const Vec& u, const Vec& p,
                          const Vec& theta) {
    return hamiltonian_bolza(problem_of(problem), t, x, u, p, theta);
  });
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
