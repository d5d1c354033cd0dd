#include <doctest.h>

#include <cmath>
#include <random>

#include "mocp/pontryagin.hpp"
#include "mocp/registry.hpp"
#include "mocp/transform.hpp"
#include "oracles/extremals.hpp"

using namespace mocp;
using oracle::v1;
using oracle::vec;

namespace {

// Random piecewise-constant control inside the control set.
NormalizedPath random_control(const BolzaProblem& prob, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int pieces = 1 + static_cast<int>(unit(rng) * 4);
  std::vector<double> corners;
  for (int i = 1; i < pieces; ++i) corners.push_back(prob.T * i / pieces + 0.05 * (unit(rng) - 0.5));
  std::vector<SegmentPtr> segs;
  for (int i = 0; i < pieces; ++i) {
    Vec u(prob.k);
    for (int j = 0; j < prob.k; ++j) {
      if (prob.control.kind() == ControlSet::Kind::Box) {
        u(j) = prob.control.lower()(j) + unit(rng) * (prob.control.upper()(j) - prob.control.lower()(j));
      } else {
        u(j) = 0.6 * (2 * unit(rng) - 1);
      }
    }
    segs.push_back(PolynomialSegment::constant(u));
  }
  return NormalizedPath(prob.T, corners, segs);
}

}  // namespace

TEST_CASE("augmented problem structure") {
  auto src = registry_problem("lq1d");
  auto aug = bolza_to_mayer(src);
  CHECK(aug.n == 3);
  CHECK(aug.is_mayer());
  CHECK(aug.xi0 == vec({0.0, 0.0, 1.0}));
  Vec X = vec({0.5, -0.25, 2.0});
  CHECK(aug.terminal_objectives(X) == vec({0.5, -0.25}));
  CHECK(aug.dynamics(0.0, X, v1(1.5)) == vec({-4.0, -2.25, 1.5}));
}

TEST_CASE("a Mayer source only gains a dummy state") {
  ProblemSpec s;
  s.n = 1;
  s.k = 1;
  s.control = ControlSet::free(1);
  s.xi0 = v1(0.3);
  s.f = {"u[0]"};
  s.f0 = {"0"};
  s.g0 = {"x[0]^2"};
  auto aug = bolza_to_mayer(build_problem(s));
  CHECK(aug.dynamics(0.0, vec({7.0, 2.0}), v1(1.0)) == vec({0.0, 1.0}));
  CHECK(aug.terminal_objectives(vec({0.0, 2.0}))(0) == 4.0);
}

TEST_CASE("lifted sigma integrates the running objective") {
  ProblemSpec s;
  s.n = 1;
  s.k = 1;
  s.control = ControlSet::free(1);
  s.xi0 = v1(1.0);
  s.f = {"-x[0]"};
  s.f0 = {"-(x[0]^2)", "1", "0"};
  s.g0 = {"0", "0", "0"};
  s.T = 2.0;
  auto prob = build_problem(s);
  auto x = oracle::c1([](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }, 2.0);
  Process proc{x, NormalizedPath::constant(2.0, v1(0.0))};
  auto lifted = lift_process(prob, proc);
  const Vec sT = lifted.state.value(2.0);
  CHECK(sT(0) == doctest::Approx(-(1 - std::exp(-4.0)) / 2).epsilon(1e-10));
  CHECK(sT(1) == doctest::Approx(2.0));
  CHECK(sT(2) == 0.0);
  const Vec s1 = lifted.state.value(1.0);
  CHECK(s1(0) == doctest::Approx(-(1 - std::exp(-2.0)) / 2).epsilon(1e-10));
}

TEST_CASE("lifting rejects inadmissible processes") {
  auto prob = registry_problem("lq1d");
  Process bad{PiecewiseC1Path::constant(1.0, v1(1.0)), NormalizedPath::constant(1.0, v1(1.0))};
  CHECK_THROWS_AS(lift_process(prob, bad), TransformError);
}

TEST_CASE("objective and admissibility equivalence on random processes") {
  std::mt19937_64 rng(2024);
  for (const auto& name : registry_names()) {
    auto prob = registry_problem(name);
    auto aug = bolza_to_mayer(prob);
    for (int rep = 0; rep < 20; ++rep) {
      auto proc = simulate(prob, random_control(prob, rng));
      const Vec J = evaluate_objectives(prob, proc);
      auto lifted = lift_process(prob, proc);
      const Vec G = aug.terminal_objectives(lifted.state.value(prob.T));
      for (int i = 0; i < prob.l(); ++i) {
        INFO(name << " objective " << i);
        CHECK(std::abs(J(i) - G(i)) <= 1e-8 * (1 + std::abs(J(i))));
      }
      const bool src_ok = check_admissible(prob, proc).admissible;
      const bool aug_ok = check_admissible(aug, lifted).admissible;
      CHECK(src_ok == aug_ok);
      Process dropped{slice(lifted.state, static_cast<std::size_t>(prob.l()), static_cast<std::size_t>(prob.n)),
                      lifted.control};
      CHECK(check_admissible(prob, dropped).admissible == aug_ok);
    }
  }
}

TEST_CASE("multiplier projection") {
  const Vec theta = vec({0.25, 0.75});
  MultiplierSet trivial{theta, Vec(0), Vec(0), PiecewiseC1Path::constant(1.0, vec({0.25, 0.75, 0.0}))};
  auto p = project_multipliers(trivial, 2);
  CHECK(p.adjoint.dim() == 1);
  CHECK(p.adjoint.value(0.5)(0) == 0.0);
  CHECK(p.theta == theta);
  auto drift = std::make_shared<FunctionSegment>(
      3, [](double t) { return vec({0.25 + 1e-3 * t, 0.75, 0.0}); },
      [](double) { return vec({1e-3, 0.0, 0.0}); });
  MultiplierSet bad{theta, Vec(0), Vec(0), PiecewiseC1Path(1.0, {}, {drift})};
  CHECK_THROWS_AS(project_multipliers(bad, 2, 1e-6), TransformError);
}

TEST_CASE("projected augmented adjoint equals the direct adjoint") {
  auto prob = registry_problem("lq1d-free");
  auto aug = bolza_to_mayer(prob);
  auto proc = simulate(prob, NormalizedPath::constant(1.0, v1(-0.4)));
  auto lifted = lift_process(prob, proc);
  const Vec theta = vec({0.5, 0.5});
  const Vec pT = transversality_value(prob, proc.state.value(1.0), theta, Vec(0), Vec(0));
  auto direct = integrate_adjoint(prob, proc, pT, theta);
  const Vec PT = transversality_value(aug, lifted.state.value(1.0), theta, Vec(0), Vec(0));
  MultiplierSet am{theta, Vec(0), Vec(0), integrate_adjoint(aug, lifted, PT, Vec::Zero(2))};
  auto projected = project_multipliers(am, 2);
  double worst = 0.0;
  for (const auto& gp : evaluation_grid(1.0, {}, 201)) {
    worst = std::max(worst, std::abs(projected.adjoint.value(gp.t)(0) - direct.value(gp.t)(0)));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("conditions on the augmented problem match the Bolza conditions") {
  auto prob = registry_problem("lq2obj-terminal");
  auto aug = bolza_to_mayer(prob);
  auto e = oracle::lq2obj_half();
  auto proc = simulate(prob, e.process.control);
  auto lifted = lift_process(prob, proc);
  const auto& m = e.multipliers;
  const Vec pT = transversality_value(prob, proc.state.value(1.0), m.theta, m.lambda, m.mu);
  MultiplierSet direct{m.theta, m.lambda, m.mu, integrate_adjoint(prob, proc, pT, m.theta)};
  const Vec PT = transversality_value(aug, lifted.state.value(1.0), m.theta, m.lambda, m.mu);
  MultiplierSet am{m.theta, m.lambda, m.mu, integrate_adjoint(aug, lifted, PT, Vec::Zero(2))};
  CheckConfig cfg;
  auto rb = check_conditions(prob, proc, direct, cfg);
  auto rm = check_conditions(aug, lifted, am, cfg);
  auto a = rb.results(), b = rm.results();
  for (std::size_t i = 0; i < a.size(); ++i) {
    INFO(a[i]->name << " " << a[i]->residual << " vs " << b[i]->residual);
    CHECK(std::abs(a[i]->residual - b[i]->residual) <= 10 * a[i]->tol);
  }
}

TEST_CASE("fixed-objective problems") {
  auto mayer = bolza_to_mayer(registry_problem("lq2obj-terminal"));
  auto p1 = fix_objective_problem(mayer, 0, vec({0.0, 5.0}));
  CHECK(p1.l() == 1);
  CHECK(p1.m() == 2);
  const Vec X = vec({0.1, 4.0, 0.7});
  // g0_2(X) - 5 = sigma_2 - 5
  CHECK(p1.inequalities(X)(1) == doctest::Approx(-1.0));
  CHECK(p1.inequalities(X)(0) == doctest::Approx(0.1));

  ProblemSpec s;
  s.n = 2;
  s.k = 1;
  s.control = ControlSet::free(1);
  s.xi0 = Vec::Zero(2);
  s.f = {"u[0]", "x[0]"};
  s.f0 = {"0", "0", "0"};
  s.g0 = {"x[0]", "x[1]^2", "x[0]*x[1]"};
  auto three = build_problem(s);
  const Vec xT = vec({2.0, 3.0});
  const Vec ref = three.terminal_objectives(xT);
  auto p2 = fix_objective_problem(three, 1, ref);
  CHECK(p2.m() == 2);
  CHECK(p2.inequalities(xT) == vec({0.0, 0.0}));
  CHECK(p2.terminal_objectives(xT)(0) == 9.0);

  s.f0 = {"0"};
  s.g0 = {"x[0]"};
  auto single = build_problem(s);
  auto p3 = fix_objective_problem(single, 0, vec({1.0}));
  CHECK(p3.m() == 0);
  CHECK(p3.l() == 1);
  CHECK_THROWS_AS(fix_objective_problem(single, 1, vec({1.0})), TransformError);
  CHECK_THROWS_AS(fix_objective_problem(registry_problem("lq1d"), 0, vec({0.0, 0.0})), TransformError);
}
