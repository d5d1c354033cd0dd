#include "mocp/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "mocp/io.hpp"
#include "mocp/qualification.hpp"
#include "mocp/registry.hpp"
#include "mocp/solver.hpp"
#include "mocp/sufficiency.hpp"
#include "mocp/transform.hpp"

namespace mocp {

namespace {

using io::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string problem_file;
  std::string registry;
  std::string trajectory_file;
  std::string out;
  std::string format = "json";
  std::string gauge = "unit";
  int gauge_j = 1;
  std::string rule = "auto";
  std::vector<double> weights;
  int grid = 11;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;
  std::size_t max_iters = FbsmConfig{}.max_iters;
  std::size_t steps = FbsmConfig{}.steps;
  bool trajectories = false;
  bool certify = false;
  bool at_solution = false;
  std::map<std::string, double> tols;
};

// Every --tol.NAME=value override and the setting it controls.
const std::map<std::string, std::string>& tol_names() {
  static const std::map<std::string, std::string> names{
      {"nn", "NN residual"},       {"si", "Si residual"},      {"sl", "Sl residual"},
      {"tc", "TC residual"},       {"ae", "AE residual"},      {"mp", "MP residual"},
      {"ch", "CH residual"},       {"cq", "CQ rank threshold"}, {"act", "active-set tolerance"},
      {"conc", "concavity sampling tolerance"}, {"shb1", "Shb1 comparison tolerance"},
      {"dom", "dominance tolerance"}, {"fbsm", "sweep control change"},
      {"feas", "terminal constraint feasibility"}};
  return names;
}

std::vector<std::string> extract_tols(const std::vector<std::string>& args, Options& o) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a.rfind("--tol.", 0) != 0) {
      rest.push_back(a);
      continue;
    }
    std::string name = a.substr(6), value;
    if (const auto eq = name.find('='); eq != std::string::npos) {
      value = name.substr(eq + 1);
      name = name.substr(0, eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    } else {
      throw InputError("--tol." + name + " needs a value");
    }
    if (!tol_names().count(name)) throw InputError("unknown tolerance '" + name + "'");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || !(v > 0.0)) {
      throw InputError("--tol." + name + " needs a positive number, got '" + value + "'");
    }
    o.tols[name] = v;
  }
  return rest;
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("PMP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("PMP_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return 0;
}

ProblemSpec load_spec(const Options& o) {
  if (!o.registry.empty()) {
    if (!in_registry(o.registry)) throw InputError("unknown registry problem '" + o.registry + "'");
    return registry_spec(o.registry);
  }
  if (o.problem_file.empty()) throw InputError("a problem file or --problem NAME is required");
  if (!std::filesystem::exists(o.problem_file) && in_registry(o.problem_file)) {
    return registry_spec(o.problem_file);
  }
  return io::problem_from_json(io::read_json_file(o.problem_file));
}

void apply(CheckConfig& c, const Options& o) {
  auto set = [&](const char* name, double& field) {
    if (auto it = o.tols.find(name); it != o.tols.end()) field = it->second;
  };
  set("nn", c.tol.nn);
  set("si", c.tol.si);
  set("sl", c.tol.sl);
  set("tc", c.tol.tc);
  set("ae", c.tol.ae);
  set("mp", c.tol.mp);
  set("ch", c.tol.ch);
  c.jobs = o.jobs;
}

struct Configs {
  CheckConfig check;
  RecoveryConfig recovery;
  CQConfig cq;
  SufficiencyConfig sufficiency;
  SolverConfig solver;
};

Configs make_configs(const Options& o, std::uint64_t seed) {
  Configs c;
  auto get = [&](const char* name, double fallback) {
    auto it = o.tols.find(name);
    return it == o.tols.end() ? fallback : it->second;
  };
  apply(c.check, o);
  c.recovery.check = c.check;
  c.recovery.seed = seed;
  c.cq.cq_tol = get("cq", c.cq.cq_tol);
  c.cq.act_tol = get("act", c.cq.act_tol);
  c.cq.seed = seed;
  c.sufficiency.sample.seed = seed;
  c.sufficiency.sample.conc_tol = get("conc", c.sufficiency.sample.conc_tol);
  c.sufficiency.shb1_tol = get("shb1", c.sufficiency.shb1_tol);
  c.sufficiency.check = c.check;
  c.sufficiency.jobs = o.jobs;
  apply(c.solver.check, o);
  c.solver.fbsm.max_iters = o.max_iters;
  c.solver.fbsm.steps = o.steps;
  c.solver.fbsm.tol = get("fbsm", c.solver.fbsm.tol);
  c.solver.al.feas_tol = get("feas", c.solver.al.feas_tol);
  c.solver.dom_tol = get("dom", c.solver.dom_tol);
  c.solver.sufficiency = c.sufficiency;
  c.solver.certify = o.certify;
  c.solver.jobs = o.jobs;
  return c;
}

json tolerances_json(const ConditionTolerances& t) {
  return {{"nn", t.nn}, {"si", t.si}, {"sl", t.sl}, {"tc", t.tc}, {"ae", t.ae}, {"mp", t.mp}, {"ch", t.ch}};
}

Vec resolve_weights(const Options& o, int l) {
  if (o.weights.empty()) return Vec::Constant(l, 1.0 / l);
  if (static_cast<int>(o.weights.size()) != l) {
    throw InputError("--weights needs " + std::to_string(l) + " components");
  }
  Vec w(l);
  for (int i = 0; i < l; ++i) w(i) = o.weights[static_cast<std::size_t>(i)];
  try {
    check_weight(w, l);
  } catch (const SolverError& e) {
    throw InputError(std::string("--weights: ") + e.what());
  }
  return w;
}

Strategy resolve_rule(const std::string& r) {
  if (r == "auto") return Strategy::Auto;
  if (r == "shb1") return Strategy::Shb1;
  if (r == "shb2") return Strategy::Shb2;
  if (r == "shb3") return Strategy::Shb3;
  throw InputError("--rule must be auto, shb1, shb2 or shb3");
}

Gauge resolve_gauge(const Options& o, int l) {
  if (o.gauge == "unit") return Gauge::unit();
  if (o.gauge == "theta1") {
    if (o.gauge_j < 1 || o.gauge_j > l) throw InputError("--gauge-j must lie in 1.." + std::to_string(l));
    return Gauge::theta_one(o.gauge_j - 1);
  }
  throw InputError("--gauge must be unit or theta1");
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw InputError("cannot write '" + o.out + "'");
  f << text;
}

json envelope(const Options& o, const ProblemSpec& spec, std::uint64_t seed, json config, json report) {
  return {{"schema_version", io::kSchemaVersion},
          {"tool", "mocp"},
          {"version", io::kToolVersion},
          {"command", o.command},
          {"problem", {{"name", spec.name}, {"hash", io::problem_hash(spec)}}},
          {"seed", seed},
          {"config", std::move(config)},
          {"report", std::move(report)}};
}

struct Candidate {
  Process process;
  std::optional<MultiplierSet> multipliers;
  std::optional<ParetoPoint> point;
};

Candidate load_candidate(const Options& o, const BolzaProblem& prob, const Configs& c) {
  if (!o.trajectory_file.empty()) {
    const auto j = io::read_json_file(o.trajectory_file);
    Candidate cand{io::process_from_json(j), std::nullopt, std::nullopt};
    if (j.contains("multipliers")) cand.multipliers = io::multipliers_from_json(j.at("multipliers"));
    return cand;
  }
  if (!o.at_solution) throw InputError(o.command + " needs a trajectory file or --at-solution");
  auto pt = solve_scalarized(prob, resolve_weights(o, prob.l()), c.solver);
  Candidate cand{pt.process, pt.multipliers, pt};
  return cand;
}

int cmd_check(const Options& o, std::ostream& out) {
  const auto spec = load_spec(o);
  const auto prob = build_problem(spec);
  const auto seed = resolve_seed(o);
  const auto c = make_configs(o, seed);
  if (o.trajectory_file.empty()) throw InputError("check needs a trajectory file");
  const auto cand = load_candidate(o, prob, c);
  const auto adm = check_admissible(prob, cand.process);
  json report{{"admissibility", io::to_json(adm)}};
  bool ok = adm.admissible;
  try {
    MultiplierSet mult = cand.multipliers ? *cand.multipliers
                                          : recover_multipliers(prob, cand.process, resolve_gauge(o, prob.l()),
                                                                c.recovery)
                                                .multipliers;
    const auto rep = check_conditions(prob, cand.process, mult, c.check);
    report["multipliers"] = io::to_json(mult, false);
    report["multipliers_source"] = cand.multipliers ? "file" : "recovered";
    report["conditions"] = io::to_json(rep);
    report["failed"] = rep.failed();
    ok = ok && rep.all_pass();
  } catch (const RecoveryError& e) {
    report["error"] = e.what();
    ok = false;
  }
  json config{{"tol", tolerances_json(c.check.tol)}, {"gauge", o.gauge}, {"grid_points", c.check.grid_points}};
  if (o.gauge == "theta1") config["gauge_j"] = o.gauge_j;
  emit(o, envelope(o, spec, seed, config, report).dump(2) + "\n", out);
  return ok ? kExitOk : kExitFailed;
}

json solver_config_json(const SolverConfig& s) {
  return {{"max_iters", s.fbsm.max_iters},
          {"relaxation", s.fbsm.relaxation},
          {"steps", s.fbsm.steps},
          {"tol", s.fbsm.tol},
          {"rho0", s.al.rho0},
          {"growth", s.al.growth},
          {"max_outer", s.al.max_outer},
          {"feas_tol", s.al.feas_tol},
          {"dom_tol", s.dom_tol},
          {"check_tol", tolerances_json(s.check.tol)},
          {"certify", s.certify}};
}

int cmd_solve(const Options& o, std::ostream& out) {
  const auto spec = load_spec(o);
  const auto prob = build_problem(spec);
  const auto seed = resolve_seed(o);
  const auto c = make_configs(o, seed);
  const Vec w = resolve_weights(o, prob.l());
  const auto pt = solve_scalarized(prob, w, c.solver);
  auto config = solver_config_json(c.solver);
  config["weights"] = io::to_json(w);
  emit(o, envelope(o, spec, seed, config, io::to_json(pt, o.trajectories)).dump(2) + "\n", out);
  return pt.failed ? kExitFailed : kExitOk;
}

int cmd_front(const Options& o, std::ostream& out) {
  const auto spec = load_spec(o);
  const auto prob = build_problem(spec);
  const auto seed = resolve_seed(o);
  const auto c = make_configs(o, seed);
  if (o.grid < 1) throw InputError("--grid must be positive");
  if (o.format != "csv" && o.format != "json") throw InputError("--format must be csv or json");
  const auto weights = weight_grid(prob.l(), std::max(o.grid - 1, 1));
  const auto front = sweep_front(prob, o.grid == 1 ? std::vector<Vec>{Vec::Constant(prob.l(), 1.0 / prob.l())}
                                                   : weights,
                                 c.solver);
  if (o.format == "csv") {
    emit(o, io::front_csv(front), out);
  } else {
    auto config = solver_config_json(c.solver);
    config["grid"] = o.grid;
    emit(o, envelope(o, spec, seed, config, io::to_json(front, o.trajectories)).dump(2) + "\n", out);
  }
  return front.failed_weights.empty() ? kExitOk : kExitFailed;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const auto spec = load_spec(o);
  const auto prob = build_problem(spec);
  const auto seed = resolve_seed(o);
  auto c = make_configs(o, seed);
  c.solver.certify = false;
  const auto strategy = resolve_rule(o.rule);
  Options oo = o;
  if (oo.trajectory_file.empty()) oo.at_solution = true;
  const auto cand = load_candidate(oo, prob, c);
  json report;
  bool ok = false;
  if (cand.point && cand.point->failed) {
    report["error"] = "solver failed: " + cand.point->failure;
  } else {
    try {
      const MultiplierSet mult =
          cand.multipliers ? *cand.multipliers
                           : recover_multipliers(prob, cand.process, resolve_gauge(o, prob.l()), c.recovery)
                                 .multipliers;
      const auto rep = certify(prob, cand.process, mult, strategy, c.sufficiency);
      report = io::to_json(rep);
      ok = rep.verdict != Verdict::Inconclusive;
    } catch (const SufficiencyError& e) {
      report["error"] = e.what();
    } catch (const RecoveryError& e) {
      report["error"] = e.what();
    }
  }
  if (cand.point) report["objectives"] = io::to_json(cand.point->objectives);
  json config{{"rule", o.rule},
              {"directions", c.sufficiency.sample.directions},
              {"grid_points", c.sufficiency.grid_points},
              {"comparisons", c.sufficiency.comparisons},
              {"conc_tol", c.sufficiency.sample.conc_tol},
              {"shb1_tol", c.sufficiency.shb1_tol},
              {"tol", tolerances_json(c.check.tol)}};
  if (cand.point) config["weights"] = io::to_json(cand.point->weight);
  emit(o, envelope(o, spec, seed, config, report).dump(2) + "\n", out);
  return ok ? kExitOk : kExitFailed;
}

int cmd_cq(const Options& o, std::ostream& out) {
  const auto spec = load_spec(o);
  const auto prob = build_problem(spec);
  const auto seed = resolve_seed(o);
  const auto c = make_configs(o, seed);
  const auto cand = load_candidate(o, prob, c);
  if (cand.point && cand.point->failed) throw SolverError("solver failed: " + cand.point->failure);
  const Vec xT = cand.process.state.value(prob.T);
  json checks = json::array();
  bool qc1 = false;
  auto run = [&](const std::string& name, auto&& fn) {
    try {
      const CQReport r = fn();
      if (r.which == "QC1") qc1 = r.holds;
      auto j = io::to_json(r);
      j["applicable"] = true;
      checks.push_back(j);
    } catch (const QualificationError& e) {
      checks.push_back({{"which", name}, {"applicable", false}, {"note", e.what()}});
    }
  };
  run("QC1", [&] { return check_QC1(prob, xT, c.cq); });
  run("QC0", [&] { return check_QC0(prob, xT, c.cq); });
  run("Alib", [&] { return check_Alib(prob, cand.process, c.cq); });
  for (int j = 0; j < prob.l(); ++j) {
    run("Af_" + std::to_string(j + 1), [&] { return check_Af(prob, cand.process, j, false, c.cq); });
    if (!prob.is_mayer()) {
      run("Af0_" + std::to_string(j + 1), [&] { return check_Af(prob, cand.process, j, true, c.cq); });
    }
  }
  run("Av3", [&] { return check_Av3(prob, cand.process, c.cq); });
  json config{{"cq_tol", c.cq.cq_tol}, {"act_tol", c.cq.act_tol}, {"at_solution", o.at_solution}};
  if (cand.point) config["weights"] = io::to_json(cand.point->weight);
  emit(o, envelope(o, spec, seed, config, {{"checks", checks}, {"QC1_holds", qc1}}).dump(2) + "\n", out);
  return qc1 ? kExitOk : kExitFailed;
}

int cmd_transform(const Options& o, std::ostream& out) {
  const auto prob = build_problem(load_spec(o));
  emit(o, io::problem_to_json(bolza_to_mayer(prob)).dump(2) + "\n", out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Multiobjective optimal control: conditions, certificates and scalarization fronts", "mocp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::kToolVersion);
  auto common = [&](CLI::App* sub, bool trajectory) {
    sub->add_option("file", o.problem_file, "problem JSON file (or a registry name)");
    if (trajectory) sub->add_option("trajectory", o.trajectory_file, "trajectory JSON file");
    sub->add_option("--problem", o.registry, "built-in problem: lq1d, lq1d-free, lq2obj-terminal, bilinear-box");
    sub->add_option("--out,-o", o.out, "write the output here instead of stdout");
    sub->add_option("--seed", o.seed, "random seed (falls back to PMP_SEED, then 0)");
    sub->add_option("--jobs,-j", o.jobs, "worker threads (default: available cores)");
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--weights", o.weights, "scalarization weights, comma separated")->delimiter(',');
    sub->add_option("--max-iters", o.max_iters, "sweep iteration limit per outer pass");
    sub->add_option("--steps", o.steps, "control nodes of the sweep");
  };
  auto gauge_flags = [&](CLI::App* sub) {
    sub->add_option("--gauge", o.gauge, "multiplier normalization for recovery: unit or theta1");
    sub->add_option("--gauge-j", o.gauge_j, "objective fixed to theta_j = 1 (1-based)");
  };
  auto* check = app.add_subcommand("check", "admissibility and necessary conditions of a given process");
  common(check, true);
  gauge_flags(check);
  auto* solve = app.add_subcommand("solve", "solve one weighted scalarization");
  common(solve, false);
  solver_flags(solve);
  solve->add_flag("--certify", o.certify, "run the sufficiency certifier on the result");
  solve->add_flag("--trajectories", o.trajectories, "include the process and adjoint");
  auto* front = app.add_subcommand("front", "scalarization front over a weight grid");
  common(front, false);
  solver_flags(front);
  front->add_option("--grid", o.grid, "weights per objective axis");
  front->add_option("--format", o.format, "csv or json");
  front->add_flag("--certify", o.certify, "certify every point");
  front->add_flag("--trajectories", o.trajectories, "include processes in JSON output");
  auto* cert = app.add_subcommand("certify", "sufficient conditions for a process (solves when none is given)");
  common(cert, true);
  solver_flags(cert);
  gauge_flags(cert);
  cert->add_option("--rule", o.rule, "auto, shb1, shb2 or shb3");
  auto* cq = app.add_subcommand("cq", "constraint qualifications at a process");
  common(cq, true);
  solver_flags(cq);
  cq->add_flag("--at-solution", o.at_solution, "solve first and test at the solution");
  auto* tr = app.add_subcommand("transform", "emit the equivalent Mayer problem");
  common(tr, false);

  try {
    auto args = extract_tols(raw, o);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInput;
  } catch (const InputError& e) {
    err << "mocp: " << e.what() << "\n";
    return kExitInput;
  }
  if (o.jobs == 0) o.jobs = std::max(1u, std::thread::hardware_concurrency());
  const std::string cmd = app.get_subcommands().front()->get_name();
  o.command = cmd;
  // with --problem the only positional is the trajectory
  if (!o.registry.empty() && o.trajectory_file.empty() && (cmd == "check" || cmd == "certify" || cmd == "cq")) {
    std::swap(o.problem_file, o.trajectory_file);
  }
  try {
    if (cmd == "check") return cmd_check(o, out);
    if (cmd == "solve") return cmd_solve(o, out);
    if (cmd == "front") return cmd_front(o, out);
    if (cmd == "certify") return cmd_certify(o, out);
    if (cmd == "cq") return cmd_cq(o, out);
    return cmd_transform(o, out);
  } catch (const io::ParseError& e) {
    err << "mocp: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "mocp: " << e.what() << "\n";
    return kExitInput;
  } catch (const expr::ParseError& e) {
    err << "mocp: expression error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ProblemError& e) {
    err << "mocp: invalid problem: " << e.what() << "\n";
    return kExitInput;
  } catch (const TrajectoryError& e) {
    err << "mocp: invalid trajectory: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "mocp: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace mocp
