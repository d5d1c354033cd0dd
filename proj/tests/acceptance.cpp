// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mocp/cli.hpp"
#include "mocp/pontryagin.hpp"
#include "mocp/qualification.hpp"
#include "mocp/registry.hpp"
#include "mocp/solver.hpp"
#include "mocp/sufficiency.hpp"
#include "mocp/transform.hpp"
#include "oracles/extremals.hpp"
#include "oracles/transcription.hpp"

using namespace mocp;
using oracle::v1;
using oracle::vec;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome trajectory_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::uniform_int_distribution<int> corners_count(0, 5);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const double T = 0.5 + 2.0 * (U(rng) + 1.0);
    const int nc = corners_count(rng);
    std::vector<double> cs;
    for (int i = 0; i < nc; ++i) cs.push_back(T * (i + 1.0 + 0.3 * U(rng)) / (nc + 1.0));
    const int dim = 1 + rep % 3;
    std::vector<SegmentPtr> segs;
    Vec start = Vec::NullaryExpr(dim, [&] { return U(rng); });
    double a = 0.0;
    for (int i = 0; i <= nc; ++i) {
      Mat c(dim, 5);
      c.col(0) = start;
      for (int k = 1; k < 5; ++k) c.col(k) = Vec::NullaryExpr(dim, [&] { return 2.0 * U(rng); });
      auto seg = std::make_shared<PolynomialSegment>(c, a);
      const double b = i < nc ? cs[static_cast<std::size_t>(i)] : T;
      start = seg->value(b);
      segs.push_back(seg);
      a = b;
    }
    const PiecewiseC1Path x(T, cs, segs);
    const auto back = reconstruct(extended_derivative(x), x.value(0.0));
    for (const auto& gp : evaluation_grid(T, x.corners(), 2001)) {
      worst = std::max(worst, (back.value(gp.t, gp.side) - x.value(gp.t, gp.side)).cwiseAbs().maxCoeff());
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0,
          "50 paths, sup error " + fmt("%.2e", worst) + ", " + fmt("%.2f s", secs)};
}

// ---------------------------------------------------------------- 2

Outcome adjoint_order() {
  const auto prob = registry_problem("lq1d-free");
  const double a = prob.params.at("a"), T = prob.T;
  // analytic process, so the step size alone sets the adjoint grid
  const auto proc = oracle::lq1d_free_half().process;
  std::vector<double> err;
  for (double h = 0.2; err.size() < 5; h /= 2) {
    // no running term in x: p' = -a p
    const auto p = integrate_adjoint(prob, proc, v1(1.0), vec({0.0, 0.0}), h);
    double e = 0.0;
    for (const auto& gp : evaluation_grid(T, {}, 1001)) {
      e = std::max(e, std::abs(p.value(gp.t)(0) - std::exp(a * (T - gp.t))));
    }
    err.push_back(e);
  }
  bool ok = true;
  std::string ratios;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double r = err[i - 1] / err[i];
    ok = ok && r >= 8.0 && r <= 32.0;
    ratios += (i > 1 ? ", " : "") + fmt("%.2f", r);
  }
  return {ok, "error ratios per halving: " + ratios};
}

// ---------------------------------------------------------------- 3

Outcome scalarized_oracle() {
  const auto prob = registry_problem("lq1d");
  const auto P = oracle::lq_scalar(0.0, 2.0);
  bool ok = true;
  std::string detail;
  for (const Vec& w : {vec({1.0, 0.0}), vec({0.5, 0.5}), vec({0.0, 1.0})}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto pt = solve_scalarized(prob, w);
    const double secs = seconds_since(t0);
    const auto orc = oracle::transcribe(P, w);
    const double gap = std::abs(w.dot(pt.objectives) - orc.value);
    ok = ok && !pt.failed && gap <= 1e-4 && secs < 30.0;
    detail += (detail.empty() ? "" : "; ") + fmt("theta1=%.1f", w(0)) + fmt(" gap %.1e", gap) +
              fmt(" in %.1f s", secs);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 4

Outcome necessary_certification() {
  struct Case {
    const char* problem;
    oracle::Extremal e;
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : {Case{"lq1d", oracle::lq1d_half()}, Case{"lq1d-free", oracle::lq1d_free_half()},
                        Case{"lq2obj-terminal", oracle::lq2obj_half()}, Case{"bilinear-box", oracle::bilinear_half()}}) {
    const bool pass = check_conditions(registry_problem(c.problem), c.e.process, c.e.multipliers).all_pass();
    ok = ok && pass;
    if (!pass) detail += std::string(c.problem) + " extremal fails; ";
  }
  const auto lq = registry_problem("lq1d");
  const auto half = oracle::lq1d_half();
  const auto& m = half.multipliers;
  auto caught = [&](const char* what, const BolzaProblem& prob, const Process& proc, const MultiplierSet& mult,
                    const char* intended) {
    const auto rep = check_conditions(prob, proc, mult);
    bool hit = false;
    for (const auto& f : rep.failed()) hit = hit || f == intended;
    ok = ok && hit;
    detail += std::string(what) + "->" + (hit ? intended : "missed") + " ";
  };
  {
    const auto& p = m.adjoint;
    MultiplierSet flipped = m;
    flipped.adjoint = oracle::c1([p](double t) { return -p.value(t)(0); }, [p](double t) { return -p.derivative(t)(0); });
    caught("wrong-sign-p", lq, half.process, flipped, "AE");
  }
  {
    auto l2 = oracle::lq2obj_half();
    l2.multipliers.lambda = vec({0.1});
    caught("inactive-lambda", registry_problem("lq2obj-terminal"), l2.process, l2.multipliers, "Sl");
  }
  {
    const auto& u = half.process.control;
    auto bumped = std::make_shared<FunctionSegment>(1, [u](double t) { return Vec(u.value(t).array() + 0.1); });
    caught("control", lq, {half.process.state, NormalizedPath(1.0, {}, {bumped})}, m, "MP");
  }
  {
    MultiplierSet neg = m;
    neg.theta(1) = -neg.theta(1);
    caught("negative-theta", lq, half.process, neg, "Si");
  }
  {
    const auto& p = m.adjoint;
    MultiplierSet shifted = m;
    shifted.adjoint = oracle::c1([p](double t) { return p.value(t)(0) + 0.05; }, [p](double t) { return p.derivative(t)(0); });
    caught("broken-TC", lq, half.process, shifted, "TC");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 5

Outcome bolza_mayer_consistency() {
  const auto prob = registry_problem("lq2obj-terminal");
  const auto aug = bolza_to_mayer(prob);
  bool ok = true;
  double worst_ratio = 0.0;
  for (const auto& e : {oracle::lq2obj_half(), oracle::lq2obj_reach()}) {
    const auto proc = simulate(prob, e.process.control);
    const auto lifted = lift_process(prob, proc);
    const auto& m = e.multipliers;
    const Vec pT = transversality_value(prob, proc.state.value(prob.T), m.theta, m.lambda, m.mu);
    const MultiplierSet direct{m.theta, m.lambda, m.mu, integrate_adjoint(prob, proc, pT, m.theta)};
    const Vec PT = transversality_value(aug, lifted.state.value(prob.T), m.theta, m.lambda, m.mu);
    const MultiplierSet augmented{m.theta, m.lambda, m.mu, integrate_adjoint(aug, lifted, PT, Vec::Zero(prob.l()))};
    const auto projected = project_multipliers(augmented, prob.l());
    ok = ok && (projected.theta - m.theta).norm() <= 1e-6;
    const auto a = check_conditions(prob, proc, direct).results();
    const auto b = check_conditions(aug, lifted, augmented).results();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double ratio = std::abs(a[i]->residual - b[i]->residual) / a[i]->tol;
      worst_ratio = std::max(worst_ratio, ratio);
      ok = ok && ratio <= 10.0;
    }
  }
  return {ok, "largest residual gap " + fmt("%.2e", worst_ratio) + " x tolerance"};
}

// ---------------------------------------------------------------- 6

Outcome cq_corollaries() {
  const auto prob = registry_problem("lq2obj-terminal");
  const auto e = oracle::lq2obj_reach();
  const bool qc1 = check_QC1(prob, e.process.state.value(prob.T)).holds;
  const auto rec = recover_multipliers(prob, e.process, Gauge::unit());
  double low = INFINITY;
  for (const auto& gp : evaluation_grid(prob.T, rec.multipliers.adjoint.corners(), 1001)) {
    const Vec p = rec.multipliers.adjoint.value(gp.t, gp.side);
    low = std::min(low, std::sqrt(rec.multipliers.theta.squaredNorm() + p.squaredNorm()));
  }
  const bool first = qc1 && rec.report.all_pass() && low > 1e-8;

  // u = theta_2 / theta_1 = 1, x = t, p = 1/2 at theta = (1/2, 1/2)
  ProblemSpec s;
  s.name = "split";
  s.control = ControlSet::free(1);
  s.xi0 = v1(0.0);
  s.f = {"u[0]"};
  s.f0 = {"-0.5*u[0]^2", "0"};
  s.g0 = {"0", "x[0]"};
  const auto split = build_problem(s);
  const Process proc{oracle::c1([](double t) { return t; }, [](double) { return 1.0; }),
                     oracle::npc([](double) { return 1.0; })};
  const bool af = check_Af(split, proc, 0, true).holds;
  RecoveryConfig c1, c2;
  c1.seed = 1;
  c2.seed = 2;
  const auto r1 = recover_multipliers(split, proc, Gauge::theta_one(0), c1);
  const auto r2 = recover_multipliers(split, proc, Gauge::theta_one(0), c2);
  double gap = (r1.multipliers.theta - r2.multipliers.theta).cwiseAbs().maxCoeff();
  for (const auto& gp : evaluation_grid(1.0, {}, 201)) {
    gap = std::max(gap, std::abs(r1.multipliers.adjoint.value(gp.t)(0) - r2.multipliers.adjoint.value(gp.t)(0)));
  }
  const bool second = af && r1.report.all_pass() && r2.report.all_pass() && gap <= 1e-6;
  return {first && second, "min |(theta, p(t))| " + fmt("%.3f", low) + ", restart gap " + fmt("%.1e", gap)};
}

// ---------------------------------------------------------------- 7

// lq1d with u piecewise constant on 200 intervals: x is piecewise linear,
// so both objectives integrate exactly.
Eigen::Vector2d lq1d_objectives(const std::vector<double>& u) {
  const double h = 1.0 / static_cast<double>(u.size());
  double x = 1.0, j1 = 0.0, j2 = 0.0;
  for (double v : u) {
    const double y = x + h * v;
    j1 -= h * (x * x + x * y + y * y) / 3.0;
    j2 -= h * v * v;
    x = y;
  }
  return {j1, j2};
}

Outcome sufficiency_soundness() {
  const auto prob = registry_problem("lq1d");
  const auto pt = solve_scalarized(prob, vec({0.5, 0.5}));
  if (pt.failed) return {false, "solver failed: " + pt.failure};
  const auto rep = certify(prob, pt.process, pt.multipliers);
  const Vec c = pt.objectives;
  std::size_t dominating = 0;
  std::vector<double> u(200);
  for (int ia = 0; ia < 200; ++ia) {
    for (int ib = 0; ib < 200; ++ib) {
      const double a = -2.0 + 4.0 * ia / 199.0, b = -6.0 + 12.0 * ib / 199.0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        u[j] = std::clamp(a + b * (j + 0.5) / 200.0, -2.0, 2.0);
      }
      const auto q = lq1d_objectives(u);
      const bool dom = (q.array() >= c.array() - 1e-4).all() && (q.array() > c.array() + 1e-3).any();
      dominating += dom;
    }
  }
  const bool ok = rep.verdict == Verdict::Pareto && dominating == 0;
  return {ok, "verdict " + to_string(rep.verdict) + " via " + rep.rule_used + ", " + std::to_string(dominating) +
                  " of 40000 transcribed controls dominate"};
}

// ---------------------------------------------------------------- 8

Outcome implication_properties() {
  struct Case {
    const char* problem;
    oracle::Extremal e;
  };
  SufficiencyConfig cfg;
  cfg.sample.directions = 64;
  cfg.grid_points = 21;
  std::size_t antecedents = 0;
  bool ok = true;
  std::string detail;
  for (const auto& c : {Case{"lq1d", oracle::lq1d_half()}, Case{"lq1d", oracle::lq1d_track()},
                        Case{"lq1d", oracle::lq1d_effort()}, Case{"lq1d-free", oracle::lq1d_free_half()},
                        Case{"lq2obj-terminal", oracle::lq2obj_half()}, Case{"lq2obj-terminal", oracle::lq2obj_reach()},
                        Case{"bilinear-box", oracle::bilinear_half()}}) {
    const auto prob = registry_problem(c.problem);
    bool antecedent = false;
    for (auto check : {&check_Shb2, &check_Shb3}) {
      try {
        antecedent = antecedent || check(prob, c.e.process, c.e.multipliers, cfg).holds;
      } catch (const SufficiencyError&) {
      }
    }
    if (!antecedent) continue;
    ++antecedents;
    const auto comps = comparison_processes(prob, c.e.process, cfg);
    const auto shb1 = check_Shb1(prob, c.e.process, c.e.multipliers, comps, cfg);
    ok = ok && shb1.holds;
    if (!shb1.holds) detail += std::string(c.problem) + " Shb1 residual " + fmt("%.2e; ", shb1.residual);
  }
  ok = ok && antecedents > 0;
  return {ok, std::to_string(antecedents) + " instances with Shb2 or Shb3 holding, Shb1 held on all" +
                  (detail.empty() ? "" : " except: " + detail)};
}

// ---------------------------------------------------------------- 9

Outcome dominance_brute_force() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> dims(1, 4), sizes(0, 50), small(0, 4);
  std::normal_distribution<double> n01;
  const double tol = 1e-9;
  std::size_t mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int l = dims(rng);
    const int N = sizes(rng);
    std::vector<Vec> pts;
    for (int i = 0; i < N; ++i) {
      // coarse values force ties; every third set is continuous
      pts.push_back(Vec::NullaryExpr(l, [&] { return rep % 3 ? small(rng) * 0.5 : n01(rng); }));
    }
    const auto flags = dominance_filter(pts, tol);
    for (int a = 0; a < N; ++a) {
      bool dom = false, weak = false;
      for (int b = 0; b < N; ++b) {
        bool all_ge = true, some_gt = false, all_gt = true;
        for (int i = 0; i < l; ++i) {
          const double qa = pts[a](i), qb = pts[b](i);
          if (!(qb >= qa - tol)) all_ge = false;
          if (qb > qa + tol) some_gt = true;
          if (!(qb > qa + tol)) all_gt = false;
        }
        dom = dom || (all_ge && some_gt);
        weak = weak || all_gt;
      }
      mismatches += (dom != flags.dominated[static_cast<std::size_t>(a)]) +
                    (weak != flags.weakly_dominated[static_cast<std::size_t>(a)]);
    }
  }
  return {mismatches == 0, "1000 random sets, " + std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- 10

Outcome cli_determinism() {
  auto front = [](const char* jobs) {
    std::ostringstream out, err;
    const int code = run_cli({"front", "--problem", "lq1d", "--grid", "11", "--seed", "7", "--jobs", jobs,
                              "--format", "csv"},
                             out, err);
    return std::make_pair(code, out.str());
  };
  const auto a = front("1");
  const auto b = front("8");
  const auto rows = std::count(a.second.begin(), a.second.end(), '\n') - 1;
  const bool ok = a.first == 0 && b.first == 0 && a.second == b.second && rows == 11;
  return {ok, std::to_string(rows) + " rows, outputs " + (a.second == b.second ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"trajectory round-trip", trajectory_round_trip},
      {"adjoint fourth-order convergence", adjoint_order},
      {"scalarized solves match direct transcription", scalarized_oracle},
      {"necessary conditions accept extremals and catch corruptions", necessary_certification},
      {"Bolza and Mayer checks agree", bolza_mayer_consistency},
      {"qualification corollaries", cq_corollaries},
      {"sufficiency verdict not contradicted by transcription", sufficiency_soundness},
      {"Shb2 and Shb3 imply Shb1 on samples", implication_properties},
      {"dominance filter matches brute force", dominance_brute_force},
      {"front CSV identical across job counts", cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
