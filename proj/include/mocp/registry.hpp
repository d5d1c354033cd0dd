#pragma once

#include <string>
#include <vector>

#include "mocp/problem.hpp"

namespace mocp {

/// Names of the built-in problems.
std::vector<std::string> registry_names();
bool in_registry(const std::string& name);
/// Throws ProblemError for an unknown name.
ProblemSpec registry_spec(const std::string& name);
BolzaProblem registry_problem(const std::string& name);

}  // namespace mocp
