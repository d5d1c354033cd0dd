#include "mocp/registry.hpp"

#include <algorithm>

namespace mocp {

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

ProblemSpec scalar(std::string name, ControlSet control, double xi0, std::string f) {
  ProblemSpec s;
  s.name = std::move(name);
  s.T = 1.0;
  s.n = 1;
  s.k = 1;
  s.control = std::move(control);
  s.xi0 = v1(xi0);
  s.f = {std::move(f)};
  return s;
}

}  // namespace

std::vector<std::string> registry_names() {
  return {"lq1d", "lq1d-free", "lq2obj-terminal", "bilinear-box"};
}

bool in_registry(const std::string& name) {
  const auto names = registry_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ProblemSpec registry_spec(const std::string& name) {
  if (name == "lq1d") {
    // tracking versus effort, bounded control
    auto s = scalar(name, ControlSet::box(v1(-2.0), v1(2.0)), 1.0, "u[0]");
    s.f0 = {"-x[0]^2", "-u[0]^2"};
    s.g0 = {"0", "0"};
    return s;
  }
  if (name == "lq1d-free") {
    auto s = scalar(name, ControlSet::free(1), 1.0, "a*x[0] + u[0]");
    s.params = {{"a", 1.0}};
    s.f0 = {"-x[0]^2", "-u[0]^2"};
    s.g0 = {"0", "0"};
    return s;
  }
  if (name == "lq2obj-terminal") {
    // reach far at low cost while keeping the path small; x(T) <= 0.8
    auto s = scalar(name, ControlSet::free(1), 0.0, "u[0]");
    s.f0 = {"-0.5*u[0]^2", "-x[0]^2"};
    s.g0 = {"x[0]", "0"};
    s.g = {"0.8 - x[0]"};
    return s;
  }
  if (name == "bilinear-box") {
    auto s = scalar(name, ControlSet::box(v1(-1.0), v1(1.0)), 1.0, "x[0]*u[0]");
    s.f0 = {"0", "-0.5*u[0]^2"};
    s.g0 = {"x[0]", "0"};
    s.g = {"3 - x[0]"};
    return s;
  }
  throw ProblemError("unknown registry problem '" + name + "'");
}

BolzaProblem registry_problem(const std::string& name) { return build_problem(registry_spec(name)); }

}  // namespace mocp
