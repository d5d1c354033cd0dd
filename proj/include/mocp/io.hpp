#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocp/multipliers.hpp"
#include "mocp/pontryagin.hpp"
#include "mocp/problem.hpp"
#include "mocp/qualification.hpp"
#include "mocp/solver.hpp"
#include "mocp/sufficiency.hpp"

namespace mocp::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.3.0";

/// Malformed input. `offset` is the byte position for syntax errors.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), offset(offset) {}
  std::size_t offset;
};

json parse_json(const std::string& text, const std::string& origin = "input");
json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

ProblemSpec problem_from_json(const json& j);
json problem_to_json(const ProblemSpec& spec);
json problem_to_json(const BolzaProblem& prob);
/// FNV-1a of the canonical problem JSON, as 16 hex digits.
std::string problem_hash(const ProblemSpec& spec);

/// {T, corners, interpolation, samples: [{t, value, derivative?}]}. Interior
/// corners appear twice, left value first. Samples cover a uniform grid of
/// `points` per piece plus every segment breakpoint.
json path_to_json(const PiecewisePath& path, bool derivatives, std::size_t points = 101);
PiecewiseC1Path c1_path_from_json(const json& j);
NormalizedPath normalized_path_from_json(const json& j);

json process_to_json(const Process& proc, std::size_t points = 101);
Process process_from_json(const json& j);

json to_json(const Vec& v);
Vec vec_from_json(const json& j, const std::string& what);

json to_json(const MultiplierSet& m, bool with_adjoint = true);
MultiplierSet multipliers_from_json(const json& j);
json to_json(const ConditionResult& r);
json to_json(const ConditionReport& r);
json to_json(const AdmissibilityReport& r);
json to_json(const CQReport& r);
json to_json(const ConcavityVerdict& v);
json to_json(const HamiltonianCheck& h);
json to_json(const SufficiencyReport& r);
json to_json(const ParetoPoint& p, bool trajectories = false);
json to_json(const ParetoFront& f, bool trajectories = false);

/// One row per front point: theta_i, J_i, dominated, max condition residual.
std::string front_csv(const ParetoFront& front);

/// Non-finite values become null.
json number(double x);

}  // namespace mocp::io
