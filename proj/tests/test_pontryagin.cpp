#include <doctest.h>

#include <cmath>

#include "mocp/pontryagin.hpp"
#include "mocp/registry.hpp"
#include "oracles/extremals.hpp"

using namespace mocp;
using oracle::v1;
using oracle::vec;

namespace {

BolzaProblem scalar(std::string f, std::vector<std::string> f0, std::vector<std::string> g0,
                    double T = 1.0, ControlSet U = ControlSet::free(1),
                    std::map<std::string, double> params = {}) {
  ProblemSpec s;
  s.T = T;
  s.n = 1;
  s.k = 1;
  s.control = std::move(U);
  s.xi0 = v1(0.0);
  s.f = {std::move(f)};
  s.f0 = std::move(f0);
  s.g0 = std::move(g0);
  s.params = std::move(params);
  return build_problem(s);
}

Process still(double T = 1.0) {
  return {PiecewiseC1Path::constant(T, v1(0.0)), NormalizedPath::constant(T, v1(0.0))};
}

void require_extremal(const BolzaProblem& prob, const oracle::Extremal& e, double bound = 1e-6) {
  auto rep = check_conditions(prob, e.process, e.multipliers);
  for (const auto* r : rep.results()) {
    INFO(prob.name << " " << r->name << " residual " << r->residual);
    CHECK(r->residual <= bound);
  }
}

}  // namespace

TEST_CASE("Hamiltonian values") {
  auto p = scalar("u[0]", {"-(u[0]^2)"}, {"0"});
  CHECK(hamiltonian_mayer(p, 0, v1(0), v1(3), v1(2)) == 6.0);
  CHECK(hamiltonian_mayer(p, 0.3, v1(5), v1(3), v1(0)) == 0.0);
  CHECK(hamiltonian_bolza(p, 0, v1(0), v1(1), v1(2), vec({1.0})) == 1.0);
  CHECK(hamiltonian_bolza(p, 0, v1(0), v1(1), v1(2), vec({0.0})) == hamiltonian_mayer(p, 0, v1(0), v1(1), v1(2)));
  auto q = scalar("x[0] + u[0]", {"0"}, {"0"});
  CHECK(hamiltonian_mayer(q, 0, v1(1), v1(2), v1(-1)) == -3.0);
  auto lq = registry_problem("lq1d");
  CHECK(hamiltonian_bolza(lq, 0, v1(2), v1(0), v1(0), vec({1.0, 0.0})) == -4.0);
}

TEST_CASE("adjoint of a linear system") {
  auto p = scalar("a*x[0]", {"0"}, {"0"}, 1.0, ControlSet::free(1), {{"a", 1.0}});
  auto adj = integrate_adjoint(p, still(), v1(1.0), vec({0.0}));
  CHECK(std::abs(adj.value(0.0)(0) - std::exp(1.0)) < 1e-8);
  CHECK(std::abs(adj.value(0.4)(0) - std::exp(0.6)) < 1e-8);
}

TEST_CASE("adjoint is constant when f ignores x") {
  auto p = scalar("u[0]", {"0"}, {"0"});
  auto adj = integrate_adjoint(p, still(), v1(0.7), vec({0.0}));
  CHECK(adj.value(0.0)(0) == doctest::Approx(0.7));
}

TEST_CASE("adjoint driven by the running objective") {
  auto p = scalar("u[0]", {"x[0]"}, {"0"}, 2.0);
  auto adj = integrate_adjoint(p, still(2.0), v1(0.0), vec({1.0}));
  CHECK(adj.value(0.0)(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(adj.value(1.5)(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("closed-form extremals satisfy every condition") {
  require_extremal(registry_problem("lq1d"), oracle::lq1d_half());
  require_extremal(registry_problem("lq1d"), oracle::lq1d_track());
  require_extremal(registry_problem("lq1d"), oracle::lq1d_effort());
  require_extremal(registry_problem("lq1d-free"), oracle::lq1d_free_half());
  require_extremal(registry_problem("lq2obj-terminal"), oracle::lq2obj_half());
  require_extremal(registry_problem("lq2obj-terminal"), oracle::lq2obj_reach());
  require_extremal(registry_problem("bilinear-box"), oracle::bilinear_half());
}

TEST_CASE("a perturbed control breaks the maximum principle") {
  auto prob = registry_problem("lq1d");
  auto e = oracle::lq1d_half();
  const auto& u = e.process.control;
  auto bumped = std::make_shared<FunctionSegment>(1, [u](double t) { return Vec(u.value(t).array() + 0.1); });
  NormalizedPath up(1.0, {0.5}, {bumped, u.segment_ptr(0)});
  Process perturbed{e.process.state, up};
  auto rep = check_conditions(prob, perturbed, e.multipliers);
  CHECK(rep.mp.residual >= 1e-3);
  CHECK_FALSE(check_admissible(prob, perturbed).admissible);
  auto resim = simulate(prob, up);
  auto rep2 = check_conditions(prob, resim, e.multipliers);
  CHECK_FALSE(rep2.mp.pass);
  CHECK_FALSE(rep2.ae.pass);
}

TEST_CASE("zero multipliers fail only non-nullity") {
  auto prob = registry_problem("lq1d");
  MultiplierSet zero{vec({0.0, 0.0}), Vec(0), Vec(0), PiecewiseC1Path::constant(1.0, v1(0.0))};
  auto e = oracle::lq1d_half();
  auto rep = check_conditions(prob, e.process, zero);
  CHECK(rep.nn.residual == 1.0);
  CHECK_FALSE(rep.nn.pass);
  for (const auto* r : rep.results()) {
    if (r->name != "NN") CHECK(r->residual == 0.0);
  }
}

TEST_CASE("Bolza and Mayer forms agree without running objectives") {
  ProblemSpec s;
  s.n = 1;
  s.k = 1;
  s.control = ControlSet::box(v1(-1), v1(1));
  s.xi0 = v1(0.5);
  s.f = {"x[0]*u[0] - 0.2*x[0]^2"};
  s.f0 = {"0", "0"};
  s.g0 = {"x[0]", "-x[0]^2"};
  auto prob = build_problem(s);
  auto proc = simulate(prob, NormalizedPath::constant(1.0, v1(0.3)));
  MultiplierSet mult{vec({0.6, 0.8}), Vec(0), Vec(0), integrate_adjoint(prob, proc, v1(0.3), vec({0.6, 0.8}))};
  CheckConfig bolza, mayer;
  mayer.form = HamiltonianForm::Mayer;
  auto a = check_conditions(prob, proc, mult, bolza);
  auto b = check_conditions(prob, proc, mult, mayer);
  auto ra = a.results(), rb = b.results();
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(std::abs(ra[i]->residual - rb[i]->residual) <= 1e-12);
}

TEST_CASE("residuals scale linearly with the multipliers") {
  auto prob = registry_problem("lq2obj-terminal");
  auto e = oracle::lq2obj_half();
  auto proc = simulate(prob, NormalizedPath::constant(1.0, v1(0.5)));
  auto rep = check_conditions(prob, proc, e.multipliers);
  for (double c : {0.5, 3.0}) {
    const auto& m = e.multipliers;
    const auto& P = m.adjoint;
    auto scaled_seg = std::make_shared<FunctionSegment>(
        1, [P, c](double t) { return Vec(c * P.value(t)); }, [P, c](double t) { return Vec(c * P.derivative(t)); });
    MultiplierSet sm{c * m.theta, c * m.lambda, c * m.mu, PiecewiseC1Path(1.0, {}, {scaled_seg})};
    auto sr = check_conditions(prob, proc, sm);
    auto a = rep.results(), b = sr.results();
    for (std::size_t i = 1; i < a.size(); ++i) {
      INFO(a[i]->name);
      CHECK(b[i]->residual == doctest::Approx(c * a[i]->residual).epsilon(1e-9));
      if (a[i]->residual > 1e-3) CHECK(b[i]->pass == a[i]->pass);
    }
  }
}

TEST_CASE("adjoint residual shrinks at fourth order") {
  auto prob = registry_problem("lq1d-free");
  auto e = oracle::lq1d_free_half();
  std::vector<double> res;
  for (double h = 0.2; h > 0.2 / 17; h /= 2) {
    MultiplierSet m{vec({0.0, 0.0}), Vec(0), Vec(0), integrate_adjoint(prob, e.process, v1(1.0), vec({0.0, 0.0}), h)};
    res.push_back(check_conditions(prob, e.process, m).ae.residual);
  }
  for (std::size_t i = 1; i < res.size(); ++i) {
    const double ratio = res[i - 1] / res[i];
    INFO(ratio);
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
  }
}

TEST_CASE("maximum principle residual is not beaten by a finer brute-force grid") {
  auto prob = registry_problem("bilinear-box");
  auto proc = simulate(prob, NormalizedPath::constant(1.0, v1(0.2)));
  Vec theta = vec({0.5, 0.5});
  MultiplierSet m{theta, vec({0.0}), Vec(0), integrate_adjoint(prob, proc, v1(0.5), theta)};
  CheckConfig cfg;
  auto rep = check_conditions(prob, proc, m, cfg);
  double brute = 0.0;
  for (const auto& gp : evaluation_grid(1.0, {}, 101)) {
    const Vec x = proc.state.value(gp.t), u = proc.control.value(gp.t), p = m.adjoint.value(gp.t);
    const double h0 = hamiltonian_bolza(prob, gp.t, x, u, p, theta);
    for (int i = 0; i <= 1000; ++i) {
      const double z = -1.0 + 2.0 * i / 1000.0;
      brute = std::max(brute, hamiltonian_bolza(prob, gp.t, x, v1(z), p, theta) - h0);
    }
  }
  CHECK(brute <= rep.mp.residual + cfg.mp_refine_tol);
}

TEST_CASE("parallel checking matches serial checking") {
  auto prob = registry_problem("lq1d");
  auto e = oracle::lq1d_half();
  CheckConfig serial, par;
  par.jobs = 4;
  auto a = check_conditions(prob, e.process, e.multipliers, serial);
  auto b = check_conditions(prob, e.process, e.multipliers, par);
  for (std::size_t i = 0; i < a.results().size(); ++i) {
    CHECK(a.results()[i]->residual == b.results()[i]->residual);
  }
}

TEST_CASE("multiplier recovery on lq1d with theta_1 = 1") {
  auto prob = registry_problem("lq1d");
  auto e = oracle::lq1d_half();
  auto rec = recover_multipliers(prob, e.process, Gauge::theta_one(0));
  // oracle multipliers scaled so that theta_1 = 1
  const double s = 1.0 / e.multipliers.theta(0);
  CHECK(std::abs(rec.multipliers.theta(0) - 1.0) < 1e-12);
  CHECK(std::abs(rec.multipliers.theta(1) - s * e.multipliers.theta(1)) < 1e-4);
  double worst = 0.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    worst = std::max(worst, std::abs(rec.multipliers.adjoint.value(t)(0) - s * e.multipliers.adjoint.value(t)(0)));
  }
  CHECK(worst < 1e-4);
  CHECK(rec.report.all_pass());
}

TEST_CASE("unit-gauge recovery finds the constrained multipliers") {
  auto prob = registry_problem("lq2obj-terminal");
  auto e = oracle::lq2obj_reach();
  auto rec = recover_multipliers(prob, e.process, Gauge::unit());
  CHECK(rec.multipliers.norm() == doctest::Approx(1.0));
  CHECK((rec.multipliers.theta - e.multipliers.theta).norm() < 1e-5);
  CHECK(std::abs(rec.multipliers.lambda(0) - e.multipliers.lambda(0)) < 1e-5);
  CHECK(rec.report.all_pass());
}

TEST_CASE("recovery on a non-extremal candidate reports failure") {
  ProblemSpec s;
  s.n = 1;
  s.k = 1;
  s.control = ControlSet::box(v1(-1), v1(1));
  s.xi0 = v1(0.0);
  s.f = {"u[0]"};
  s.f0 = {"x[0]"};
  s.g0 = {"x[0]"};
  auto prob = build_problem(s);
  auto rec = recover_multipliers(prob, still(), Gauge::unit());
  CHECK_FALSE(rec.report.all_pass());
  CHECK_FALSE(rec.report.mp.pass);
}

TEST_CASE("theta gauge is rejected when theta_j must vanish") {
  auto prob = registry_problem("lq1d");
  auto e = oracle::lq1d_effort();
  CHECK_THROWS_AS(recover_multipliers(prob, e.process, Gauge::theta_one(0)), GaugeInfeasible);
}
