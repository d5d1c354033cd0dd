#include "mocp/transform.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace mocp {

namespace {

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

BolzaProblem bolza_to_mayer(const BolzaProblem& prob) {
  const int l = prob.l(), n = prob.n, N = l + n;
  BolzaProblem out;
  out.name = prob.name.empty() ? "mayer" : prob.name + "-mayer";
  out.T = prob.T;
  out.n = N;
  out.k = prob.k;
  out.control = prob.control;
  out.params = prob.params;
  out.xi0 = Vec::Zero(N);
  out.xi0.tail(n) = prob.xi0;
  if (prob.domain) {
    Box b{Vec::Constant(N, -std::numeric_limits<double>::infinity()),
          Vec::Constant(N, std::numeric_limits<double>::infinity())};
    b.lower.tail(n) = prob.domain->lower;
    b.upper.tail(n) = prob.domain->upper;
    out.domain = b;
  }
  auto add = [&](std::vector<ScalarField>& dst, std::vector<std::string>& src, const expr::Expr& e,
                 int k) {
    dst.emplace_back(e, N, k);
    src.push_back(e.to_string());
  };
  for (const auto& f0 : prob.f0) add(out.f, out.sources.f, f0.expr().shift_state(l), prob.k);
  for (const auto& f : prob.f) add(out.f, out.sources.f, f.expr().shift_state(l), prob.k);
  for (int i = 0; i < l; ++i) {
    const auto& g0 = prob.g0[static_cast<std::size_t>(i)].expr();
    auto e = g0.is_zero() ? expr::Expr::state(i) : expr::Expr::state(i) + g0.shift_state(l);
    add(out.g0, out.sources.g0, e, 0);
    add(out.f0, out.sources.f0, expr::Expr::constant(0.0), prob.k);
  }
  for (const auto& g : prob.g) add(out.g, out.sources.g, g.expr().shift_state(l), 0);
  for (const auto& h : prob.h) add(out.h, out.sources.h, h.expr().shift_state(l), 0);
  out.validate();
  return out;
}

Process lift_process(const BolzaProblem& prob, const Process& proc,
                     const AdmissibilityTolerances& tol) {
  const auto rep = check_admissible(prob, proc, tol);
  if (!rep.admissible) throw TransformError("cannot lift an inadmissible process");
  const auto l = static_cast<std::size_t>(prob.l());
  auto running = along(proc, l, [&prob](double t, const Vec& x, const Vec& u) {
    return prob.running(t, x, u);
  });
  auto sigma = reconstruct(running, Vec::Zero(static_cast<Eigen::Index>(l)));
  std::vector<PiecewiseC1Path> parts{sigma, proc.state};
  return {stack(parts), proc.control};
}

MultiplierSet project_multipliers(const MultiplierSet& augmented, int l, double tol,
                                  std::size_t grid_points) {
  const auto& P = augmented.adjoint;
  const auto L = static_cast<std::size_t>(l);
  if (augmented.theta.size() != l) throw TransformError("theta does not have l components");
  if (P.dim() <= L) throw TransformError("augmented adjoint is too short");
  for (const auto& gp : evaluation_grid(P.horizon(), P.corners(), grid_points)) {
    const Vec head = P.value(gp.t, gp.side).head(l);
    for (int i = 0; i < l; ++i) {
      const double dev = std::abs(head(i) - augmented.theta(i));
      if (dev > tol * (1.0 + std::abs(augmented.theta(i)))) {
        throw TransformError("adjoint component " + std::to_string(i) +
                             " is not constant at theta (deviation " + number(dev) + " at t=" +
                             number(gp.t) + ")");
      }
    }
  }
  return {augmented.theta, augmented.lambda, augmented.mu, slice(P, L, P.dim() - L)};
}

BolzaProblem fix_objective_problem(const BolzaProblem& mayer, int i, const Vec& ref) {
  const int l = mayer.l();
  if (i < 0 || i >= l) throw TransformError("objective index out of range");
  if (!mayer.is_mayer()) throw TransformError("fixed-objective problems need a Mayer problem");
  if (ref.size() != l) throw TransformError("reference values need l components");
  BolzaProblem out = mayer;
  const auto I = static_cast<std::size_t>(i);
  out.name = mayer.name + "-fix" + std::to_string(i + 1);
  out.f0 = {mayer.f0[I]};
  out.g0 = {mayer.g0[I]};
  if (mayer.sources.f0.size() == mayer.f0.size()) out.sources.f0 = {mayer.sources.f0[I]};
  if (mayer.sources.g0.size() == mayer.g0.size()) out.sources.g0 = {mayer.sources.g0[I]};
  const bool keep_sources = mayer.sources.g.size() == mayer.g.size();
  if (!keep_sources) out.sources.g.clear();
  for (int k = 0; k < l; ++k) {
    if (k == i) continue;
    const auto& g0 = mayer.g0[static_cast<std::size_t>(k)].expr();
    auto e = g0 - expr::Expr::constant(ref(k));
    out.g.emplace_back(e, mayer.n, 0);
    if (keep_sources) out.sources.g.push_back(e.to_string());
  }
  return out;
}

}  // namespace mocp
