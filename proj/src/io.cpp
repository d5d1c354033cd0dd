#include "mocp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mocp::io {

namespace {

constexpr double kTimeEps = 1e-12;

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int int_field(const json& j, const char* key, const std::string& where) {
  const auto& v = field(j, key, where);
  if (!v.is_number_integer()) throw ParseError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

std::vector<std::string> strings(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw ParseError(std::string("problem: missing field '") + key + "'");
    return {};
  }
  const auto& a = j.at(key);
  if (!a.is_array()) throw ParseError(std::string("problem: '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : a) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number()) {
      std::ostringstream os;
      os.precision(17);
      os << e.get<double>();
      out.push_back(os.str());
    } else {
      throw ParseError(std::string("problem: entries of '") + key + "' must be expression strings");
    }
  }
  return out;
}

json string_array(const std::vector<std::string>& xs) {
  json a = json::array();
  for (const auto& s : xs) a.push_back(s);
  return a;
}

// Box bounds: null stands for an infinite bound.
Vec bound_from_json(const json& j, const std::string& what, double missing) {
  if (!j.is_array()) throw ParseError(what + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null()) v(static_cast<Eigen::Index>(i)) = missing;
    else if (j[i].is_number()) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    else throw ParseError(what + " must be an array of numbers");
  }
  return v;
}

json opt_number(const std::optional<double>& x) { return x ? number(*x) : json(nullptr); }

}  // namespace

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Vec vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(what + " must be an array of numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

// ---------------------------------------------------------------- problems

ProblemSpec problem_from_json(const json& j) {
  const std::string where = "problem";
  if (!j.is_object()) throw ParseError("problem: top level must be an object");
  static const std::set<std::string> known{"$schema", "description", "name", "T", "n", "k",
                                           "control_set", "omega", "xi0", "dynamics", "running",
                                           "terminal_objectives", "ineq", "eq", "params"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ParseError("problem: unknown field '" + key + "'");
  }
  ProblemSpec s;
  s.name = j.value("name", std::string("unnamed"));
  s.T = number_field(j, "T", where);
  s.n = int_field(j, "n", where);
  s.k = int_field(j, "k", where);
  if (s.n < 1 || s.k < 1) throw ParseError("problem: n and k must be positive");
  if (!(s.T > 0.0)) throw ParseError("problem: T must be positive");

  const auto& cs = field(j, "control_set", where);
  const std::string kind = field(cs, "kind", "control_set").get<std::string>();
  if (kind == "box") {
    s.control = ControlSet::box(bound_from_json(field(cs, "lower", "control_set"), "control_set.lower", -std::numeric_limits<double>::infinity()),
                                bound_from_json(field(cs, "upper", "control_set"), "control_set.upper", std::numeric_limits<double>::infinity()));
  } else if (kind == "finite") {
    std::vector<Vec> pts;
    for (const auto& p : field(cs, "points", "control_set")) pts.push_back(vec_from_json(p, "control_set.points"));
    s.control = ControlSet::finite(std::move(pts));
  } else if (kind == "free") {
    s.control = ControlSet::free(s.k);
  } else {
    throw ParseError("control_set: kind must be box, finite or free, got '" + kind + "'");
  }
  if (j.contains("omega") && !j.at("omega").is_null()) {
    const auto& om = j.at("omega");
    s.domain = Box{bound_from_json(field(om, "lower", "omega"), "omega.lower", -std::numeric_limits<double>::infinity()),
                   bound_from_json(field(om, "upper", "omega"), "omega.upper", std::numeric_limits<double>::infinity())};
  }
  s.xi0 = vec_from_json(field(j, "xi0", where), "xi0");
  s.f = strings(j, "dynamics", true);
  s.f0 = strings(j, "running", false);
  s.g0 = strings(j, "terminal_objectives", false);
  if (s.f0.empty() && s.g0.empty()) throw ParseError("problem: needs running or terminal_objectives");
  if (s.f0.empty()) s.f0.assign(s.g0.size(), "0");
  if (s.g0.empty()) s.g0.assign(s.f0.size(), "0");
  if (s.f0.size() != s.g0.size()) {
    throw ParseError("problem: running and terminal_objectives must have the same length");
  }
  s.g = strings(j, "ineq", false);
  s.h = strings(j, "eq", false);
  if (j.contains("params")) {
    const auto& ps = j.at("params");
    if (!ps.is_object()) throw ParseError("problem: params must be an object");
    for (const auto& [name, v] : ps.items()) {
      if (!v.is_number()) throw ParseError("problem: parameter '" + name + "' must be a number");
      s.params[name] = v.get<double>();
    }
  }
  return s;
}

json problem_to_json(const ProblemSpec& s) {
  json j;
  j["name"] = s.name;
  j["T"] = s.T;
  j["n"] = s.n;
  j["k"] = s.k;
  json cs;
  cs["kind"] = s.control.kind_name();
  if (s.control.kind() == ControlSet::Kind::Box) {
    cs["lower"] = to_json(s.control.lower());
    cs["upper"] = to_json(s.control.upper());
  } else if (s.control.kind() == ControlSet::Kind::Finite) {
    json pts = json::array();
    for (const auto& p : s.control.points()) pts.push_back(to_json(p));
    cs["points"] = pts;
  }
  j["control_set"] = cs;
  if (s.domain) j["omega"] = {{"lower", to_json(s.domain->lower)}, {"upper", to_json(s.domain->upper)}};
  j["xi0"] = to_json(s.xi0);
  j["dynamics"] = string_array(s.f);
  j["running"] = string_array(s.f0);
  j["terminal_objectives"] = string_array(s.g0);
  j["ineq"] = string_array(s.g);
  j["eq"] = string_array(s.h);
  json ps = json::object();
  for (const auto& [name, v] : s.params) ps[name] = v;
  j["params"] = ps;
  return j;
}

json problem_to_json(const BolzaProblem& prob) { return problem_to_json(to_spec(prob)); }

std::string problem_hash(const ProblemSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : problem_to_json(spec).dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------- paths

json path_to_json(const PiecewisePath& path, bool derivatives, std::size_t points) {
  points = std::max<std::size_t>(points, 2);
  json samples = json::array();
  for (std::size_t i = 0; i < path.segment_count(); ++i) {
    const double a = path.segment_begin(i), b = path.segment_end(i);
    std::vector<double> ts;
    for (std::size_t s = 0; s < points; ++s) {
      ts.push_back(a + (b - a) * static_cast<double>(s) / static_cast<double>(points - 1));
    }
    for (double t : path.segment(i).breakpoints()) {
      if (t > a && t < b) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(), [](double x, double y) { return std::abs(x - y) <= kTimeEps; }),
             ts.end());
    ts.front() = a;
    ts.back() = b;
    for (double t : ts) {
      json rec;
      rec["t"] = t;
      rec["value"] = to_json(path.value_in(i, t));
      if (derivatives) rec["derivative"] = to_json(path.segment(i).derivative(t));
      samples.push_back(rec);
    }
  }
  json j;
  j["T"] = path.horizon();
  j["corners"] = path.corners();
  j["interpolation"] = derivatives ? "cubic" : "linear";
  j["samples"] = samples;
  return j;
}

namespace {

struct Piece {
  std::vector<double> t;
  std::vector<Vec> x, dx;
};

struct ParsedPath {
  double T = 0.0;
  std::vector<double> corners;
  std::vector<SegmentPtr> segments;
};

ParsedPath parse_path(const json& j, Interpolation default_interp) {
  if (!j.is_object()) throw ParseError("path: must be an object");
  const auto& samples = field(j, "samples", "path");
  if (!samples.is_array() || samples.size() < 2) throw ParseError("path: needs at least two samples");
  std::vector<double> corners;
  if (j.contains("corners")) {
    for (const auto& c : j.at("corners")) {
      if (!c.is_number()) throw ParseError("path: corners must be numbers");
      corners.push_back(c.get<double>());
    }
  }
  Interpolation interp = default_interp;
  if (j.contains("interpolation")) {
    const auto s = j.at("interpolation").get<std::string>();
    if (s == "linear") interp = Interpolation::Linear;
    else if (s == "cubic") interp = Interpolation::Cubic;
    else throw ParseError("path: interpolation must be linear or cubic");
  }

  std::vector<Piece> pieces(1);
  std::size_t ci = 0;
  bool at_corner = false;  // the left record of corner ci - 1 was just closed
  double last_t = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> dim;
  bool any_derivs = false, all_derivs = true;
  for (const auto& rec : samples) {
    const double t = number_field(rec, "t", "path sample");
    if (t < last_t - kTimeEps) throw ParseError("path: sample times must be nondecreasing");
    Vec x = vec_from_json(field(rec, "value", "path sample"), "path sample value");
    if (!dim) dim = static_cast<std::size_t>(x.size());
    if (static_cast<std::size_t>(x.size()) != *dim) throw ParseError("path: inconsistent sample dimension");
    Vec dx;
    if (rec.contains("derivative")) {
      dx = vec_from_json(rec.at("derivative"), "path sample derivative");
      if (dx.size() != x.size()) throw ParseError("path: derivative dimension differs from value");
      any_derivs = true;
    } else {
      all_derivs = false;
    }
    if (at_corner) {
      const Piece& prev = pieces[pieces.size() - 2];
      if (std::abs(t - prev.t.back()) <= kTimeEps) {
        // right-hand record of the corner
        pieces.back() = Piece{{t}, {x}, {dx}};
        at_corner = false;
        last_t = t;
        continue;
      }
      // a single record at the corner: the path is continuous there
      pieces.back() = Piece{{prev.t.back()}, {prev.x.back()}, {prev.dx.back()}};
      at_corner = false;
    }
    if (!pieces.back().t.empty() && std::abs(t - pieces.back().t.back()) <= kTimeEps) {
      throw ParseError("path: repeated sample time " + std::to_string(t) + " away from a corner");
    }
    pieces.back().t.push_back(t);
    pieces.back().x.push_back(x);
    pieces.back().dx.push_back(dx);
    last_t = t;
    if (ci < corners.size() && std::abs(t - corners[ci]) <= kTimeEps) {
      pieces.emplace_back();
      ++ci;
      at_corner = true;
    } else if (ci < corners.size() && t > corners[ci]) {
      throw ParseError("path: no sample at corner " + std::to_string(corners[ci]));
    }
  }
  if (at_corner || ci != corners.size()) throw ParseError("path: samples end before the last corner");
  if (any_derivs && !all_derivs) throw ParseError("path: derivatives must be given for all samples or none");

  ParsedPath out;
  out.T = j.contains("T") ? number_field(j, "T", "path") : last_t;
  if (std::abs(pieces.front().t.front()) > kTimeEps || std::abs(last_t - out.T) > kTimeEps * std::max(1.0, out.T)) {
    throw ParseError("path: samples must span [0, T]");
  }
  out.corners = corners;
  for (auto& p : pieces) {
    if (p.t.size() < 2) throw ParseError("path: every piece needs at least two samples");
    p.t.front() = std::max(p.t.front(), 0.0);
    const Interpolation mode = (p.t.size() < 4 && !any_derivs) ? Interpolation::Linear : interp;
    out.segments.push_back(std::make_shared<SampledSegment>(
        p.t, p.x, any_derivs ? p.dx : std::vector<Vec>{}, mode));
  }
  return out;
}

}  // namespace

PiecewiseC1Path c1_path_from_json(const json& j) {
  auto p = parse_path(j, Interpolation::Cubic);
  try {
    return PiecewiseC1Path(p.T, p.corners, p.segments);
  } catch (const TrajectoryError& e) {
    throw ParseError(std::string("path: ") + e.what());
  }
}

NormalizedPath normalized_path_from_json(const json& j) {
  auto p = parse_path(j, Interpolation::Linear);
  try {
    return NormalizedPath(p.T, p.corners, p.segments);
  } catch (const TrajectoryError& e) {
    throw ParseError(std::string("path: ") + e.what());
  }
}

json process_to_json(const Process& proc, std::size_t points) {
  return {{"state", path_to_json(proc.state, true, points)},
          {"control", path_to_json(proc.control, false, points)}};
}

Process process_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("trajectory: must be an object with state and control");
  return {c1_path_from_json(field(j, "state", "trajectory")),
          normalized_path_from_json(field(j, "control", "trajectory"))};
}

// ---------------------------------------------------------------- reports

json to_json(const MultiplierSet& m, bool with_adjoint) {
  json j{{"theta", to_json(m.theta)}, {"lambda", to_json(m.lambda)}, {"mu", to_json(m.mu)}};
  if (with_adjoint) j["adjoint"] = path_to_json(m.adjoint, true);
  return j;
}

MultiplierSet multipliers_from_json(const json& j) {
  return {vec_from_json(field(j, "theta", "multipliers"), "theta"),
          vec_from_json(j.value("lambda", json::array()), "lambda"),
          vec_from_json(j.value("mu", json::array()), "mu"),
          c1_path_from_json(field(j, "adjoint", "multipliers"))};
}

json to_json(const ConditionResult& r) {
  return {{"residual", number(r.residual)},
          {"tol", number(r.tol)},
          {"pass", r.pass},
          {"argmax_t", opt_number(r.argmax_t)},
          {"argmax_control", r.argmax_control ? to_json(*r.argmax_control) : json(nullptr)}};
}

json to_json(const ConditionReport& r) {
  json j;
  for (const auto* c : r.results()) j[c->name] = to_json(*c);
  j["all_pass"] = r.all_pass();
  return j;
}

json to_json(const AdmissibilityReport& r) {
  auto pairs = [](const std::vector<std::pair<int, double>>& v) {
    json a = json::array();
    for (const auto& [i, x] : v) a.push_back({{"index", i}, {"value", number(x)}});
    return a;
  };
  return {{"admissible", r.admissible},
          {"dynamics_residual", number(r.dynamics_residual)},
          {"dynamics_argmax_t", number(r.dynamics_argmax_t)},
          {"initial_residual", number(r.initial_residual)},
          {"ineq_violations", pairs(r.ineq_violations)},
          {"eq_residuals", pairs(r.eq_residuals)},
          {"in_domain", r.in_domain},
          {"control_in_set", r.control_in_set}};
}

json to_json(const CQReport& r) {
  return {{"which", r.which},
          {"holds", r.holds},
          {"measure", number(r.measure)},
          {"threshold", number(r.threshold)},
          {"labels", r.labels},
          {"certificate", r.certificate ? to_json(*r.certificate) : json(nullptr)},
          {"certificate_residual", opt_number(r.certificate_residual)},
          {"witness_t", opt_number(r.witness_t)},
          {"note", r.note}};
}

json to_json(const ConcavityVerdict& v) {
  json ce = nullptr;
  if (v.counterexample) {
    ce = {{"y", to_json(v.counterexample->y)},
          {"t_mix", number(v.counterexample->t_mix)},
          {"violation", number(v.counterexample->violation)},
          {"time", opt_number(v.counterexample->time)}};
  }
  return {{"kind", to_string(v.kind)},
          {"holds_on_samples", v.holds_on_samples},
          {"max_violation", number(v.max_violation)},
          {"samples_used", v.samples_used},
          {"counterexample", ce}};
}

json to_json(const HamiltonianCheck& h) {
  json ce = nullptr;
  if (h.counterexample) {
    ce = {{"y", to_json(h.counterexample->y)},
          {"t_mix", number(h.counterexample->t_mix)},
          {"violation", number(h.counterexample->violation)},
          {"time", opt_number(h.counterexample->time)}};
  }
  return {{"rule", h.rule},
          {"holds", h.holds},
          {"residual", number(h.residual)},
          {"tol", number(h.tol)},
          {"argmax_t", opt_number(h.argmax_t)},
          {"counterexample", ce},
          {"samples_used", h.samples_used},
          {"comparisons", h.comparisons},
          {"discarded", h.discarded},
          {"note", h.note}};
}

json to_json(const SufficiencyReport& r) {
  json terminal = json::array();
  for (const auto& t : r.terminal) terminal.push_back({{"label", t.label}, {"verdict", to_json(t.verdict)}});
  json ham = json::array();
  for (const auto& h : r.hamiltonian) ham.push_back(to_json(h));
  return {{"rule_used", r.rule_used},
          {"verdict", to_string(r.verdict)},
          {"terminal", terminal},
          {"hamiltonian", ham},
          {"multipliers", to_json(r.multipliers, false)},
          {"conditions", to_json(r.conditions)},
          {"note", r.note}};
}

json to_json(const ParetoPoint& p, bool trajectories) {
  json j{{"weight", to_json(p.weight)},
         {"objectives", to_json(p.objectives)},
         {"multipliers", to_json(p.multipliers, trajectories)},
         {"necessary", to_json(p.necessary)},
         {"sufficiency", p.sufficiency ? to_json(*p.sufficiency) : json(nullptr)},
         {"dominated", p.dominated},
         {"weakly_dominated", p.weakly_dominated},
         {"failed", p.failed},
         {"failure", p.failure},
         {"iterations", p.iterations},
         {"outer_iterations", p.outer_iterations},
         {"relaxation", number(p.relaxation)}};
  if (trajectories) j["process"] = process_to_json(p.process);
  return j;
}

json to_json(const ParetoFront& f, bool trajectories) {
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back(to_json(p, trajectories));
  json failed = json::array();
  for (std::size_t i = 0; i < f.failed_weights.size(); ++i) {
    failed.push_back({{"weight", to_json(f.failed_weights[i])}, {"failure", f.failures[i]}});
  }
  return {{"label", "scalarization front"}, {"points", pts}, {"failed", failed}};
}

std::string front_csv(const ParetoFront& front) {
  std::ostringstream os;
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  const auto l = front.points.empty()
                     ? (front.failed_weights.empty() ? 0 : front.failed_weights.front().size())
                     : front.points.front().weight.size();
  for (Eigen::Index i = 0; i < l; ++i) os << "theta_" << i + 1 << ",";
  for (Eigen::Index i = 0; i < l; ++i) os << "J_" << i + 1 << ",";
  os << "dominated,max_residual\n";
  for (const auto& p : front.points) {
    for (Eigen::Index i = 0; i < l; ++i) os << num(p.weight(i)) << ",";
    for (Eigen::Index i = 0; i < l; ++i) os << num(p.objectives(i)) << ",";
    double worst = 0.0;
    for (const auto* c : p.necessary.results()) worst = std::max(worst, c->residual);
    os << (p.dominated ? 1 : 0) << "," << num(worst) << "\n";
  }
  return os.str();
}

}  // namespace mocp::io
