#include "mocp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mocp {

namespace {

std::span<const double> view(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double fd_step(double v) { return 1e-6 * (1.0 + std::abs(v)); }

}  // namespace

bool Box::contains(const Vec& x, double tol) const {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

ControlSet ControlSet::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw ProblemError("control box bounds must have the same positive dimension");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) <= upper(i))) throw ProblemError("control box has lower > upper");
  }
  ControlSet s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

ControlSet ControlSet::finite(std::vector<Vec> points) {
  if (points.empty()) throw ProblemError("finite control set is empty");
  const auto d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d || d == 0) throw ProblemError("finite control points differ in dimension");
  }
  ControlSet s;
  s.kind_ = Kind::Finite;
  s.dim_ = static_cast<int>(d);
  s.points_ = std::move(points);
  return s;
}

ControlSet ControlSet::free(int k) {
  if (k <= 0) throw ProblemError("control dimension must be positive");
  ControlSet s;
  s.kind_ = Kind::Free;
  s.dim_ = k;
  return s;
}

bool ControlSet::contains(const Vec& u, double tol) const {
  if (u.size() != dim_) return false;
  switch (kind_) {
    case Kind::Free:
      return u.allFinite();
    case Kind::Box:
      return Box{lower_, upper_}.contains(u, tol);
    case Kind::Finite:
      for (const auto& p : points_) {
        if ((p - u).lpNorm<Eigen::Infinity>() <= tol) return true;
      }
      return false;
  }
  return false;
}

Vec ControlSet::project(const Vec& u) const {
  switch (kind_) {
    case Kind::Free:
      return u;
    case Kind::Box:
      return u.cwiseMax(lower_).cwiseMin(upper_);
    case Kind::Finite: {
      const Vec* best = &points_.front();
      double bd = std::numeric_limits<double>::infinity();
      for (const auto& p : points_) {
        const double d = (p - u).squaredNorm();
        if (d < bd) {
          bd = d;
          best = &p;
        }
      }
      return *best;
    }
  }
  return u;
}

std::string ControlSet::kind_name() const {
  switch (kind_) {
    case Kind::Box: return "box";
    case Kind::Finite: return "finite";
    case Kind::Free: return "free";
  }
  return "?";
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(expr::Expr e, int n, int k) : expr_(std::move(e)), n_(n), k_(k) {
  if (expr_.state_extent() > n) throw ProblemError("expression uses a state index beyond n");
  if (expr_.control_extent() > k) throw ProblemError("expression uses a control index beyond k");
  value_ = expr::Compiled(expr_);
  for (int i = 0; i < n; ++i) {
    auto d = expr_.differentiate(expr::Var::x(i));
    nonsmooth_x_ = nonsmooth_x_ || d.nonsmooth;
    dx_.emplace_back(d.expr);
  }
  for (int j = 0; j < k; ++j) {
    auto d = expr_.differentiate(expr::Var::u(j));
    nonsmooth_u_ = nonsmooth_u_ || d.nonsmooth;
    du_.emplace_back(d.expr);
  }
}

ScalarField ScalarField::zero(int n, int k) { return ScalarField(expr::Expr::constant(0.0), n, k); }

bool ScalarField::depends_on_control() const { return expr_.control_extent() > 0; }

double ScalarField::value(double t, const Vec& x, const Vec& u) const {
  return value_.eval({t, view(x), view(u)});
}

double ScalarField::fd(int which, int index, double t, const Vec& x, const Vec& u) const {
  Vec xp = x, up = u;
  double& slot = which == 0 ? xp(index) : up(index);
  const double base = slot;
  const double h = fd_step(base);
  slot = base + h;
  const double fp = value(t, xp, up);
  slot = base - h;
  const double fm = value(t, xp, up);
  return (fp - fm) / (2.0 * h);
}

Vec ScalarField::grad_x(double t, const Vec& x, const Vec& u) const {
  Vec g(n_);
  for (int i = 0; i < n_; ++i) {
    g(i) = nonsmooth_x_ ? fd(0, i, t, x, u) : dx_[static_cast<std::size_t>(i)].eval({t, view(x), view(u)});
  }
  return g;
}

Vec ScalarField::grad_u(double t, const Vec& x, const Vec& u) const {
  Vec g(k_);
  for (int j = 0; j < k_; ++j) {
    g(j) = nonsmooth_u_ ? fd(1, j, t, x, u) : du_[static_cast<std::size_t>(j)].eval({t, view(x), view(u)});
  }
  return g;
}

// ---------------------------------------------------------------------------

bool BolzaProblem::is_mayer() const {
  return std::all_of(f0.begin(), f0.end(), [](const ScalarField& s) { return s.is_zero(); });
}

void BolzaProblem::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ProblemError("horizon T must be positive");
  if (n <= 0) throw ProblemError("state dimension must be positive");
  if (k != control.dim()) throw ProblemError("control dimension does not match the control set");
  if (xi0.size() != n) throw ProblemError("xi0 has the wrong dimension");
  if (static_cast<int>(f.size()) != n) throw ProblemError("dynamics must have n components");
  if (l() < 1) throw ProblemError("at least one objective is required");
  if (f0.size() != g0.size()) throw ProblemError("running and terminal objective counts differ");
  if (domain) {
    if (domain->lower.size() != n || domain->upper.size() != n) {
      throw ProblemError("domain box has the wrong dimension");
    }
    for (int i = 0; i < n; ++i) {
      if (!(domain->lower(i) <= domain->upper(i))) throw ProblemError("domain box has lower > upper");
    }
    if (!domain->contains(xi0)) throw ProblemError("xi0 lies outside the domain");
  }
}

Vec BolzaProblem::dynamics(double t, const Vec& x, const Vec& u) const {
  Vec out(n);
  for (int i = 0; i < n; ++i) out(i) = f[static_cast<std::size_t>(i)].value(t, x, u);
  return out;
}

Vec BolzaProblem::running(double t, const Vec& x, const Vec& u) const {
  Vec out(l());
  for (int i = 0; i < l(); ++i) out(i) = f0[static_cast<std::size_t>(i)].value(t, x, u);
  return out;
}

namespace {

Vec eval_terminal(const std::vector<ScalarField>& fs, const Vec& x) {
  Vec out(static_cast<Eigen::Index>(fs.size()));
  for (std::size_t i = 0; i < fs.size(); ++i) out(static_cast<Eigen::Index>(i)) = fs[i].value(x);
  return out;
}

Mat grad_rows(const std::vector<ScalarField>& fs, int n, const Vec& x) {
  Mat out(static_cast<Eigen::Index>(fs.size()), n);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = fs[i].grad_x(x).transpose();
  }
  return out;
}

std::vector<ScalarField> parse_all(const std::vector<std::string>& src,
                                   const expr::Signature& sig, int n, int k) {
  std::vector<ScalarField> out;
  for (const auto& s : src) out.emplace_back(expr::parse(s, sig), n, k);
  return out;
}

}  // namespace

Vec BolzaProblem::terminal_objectives(const Vec& x) const { return eval_terminal(g0, x); }
Vec BolzaProblem::inequalities(const Vec& x) const { return eval_terminal(g, x); }
Vec BolzaProblem::equalities(const Vec& x) const { return eval_terminal(h, x); }

BolzaProblem build_problem(const ProblemSpec& spec) {
  BolzaProblem p;
  p.name = spec.name;
  p.T = spec.T;
  p.n = spec.n;
  p.k = spec.k;
  p.domain = spec.domain;
  p.control = spec.control;
  p.xi0 = spec.xi0;
  p.params = spec.params;
  if (spec.f0.size() != spec.g0.size()) {
    throw ProblemError("running and terminal objective lists must have the same length");
  }
  const auto run = expr::Signature::running(spec.n, spec.k, spec.params);
  const auto term = expr::Signature::terminal(spec.n, spec.params);
  p.f = parse_all(spec.f, run, spec.n, spec.k);
  p.f0 = parse_all(spec.f0, run, spec.n, spec.k);
  p.g0 = parse_all(spec.g0, term, spec.n, 0);
  p.g = parse_all(spec.g, term, spec.n, 0);
  p.h = parse_all(spec.h, term, spec.n, 0);
  p.sources = {spec.f, spec.f0, spec.g0, spec.g, spec.h};
  p.validate();
  return p;
}

ProblemSpec to_spec(const BolzaProblem& prob) {
  ProblemSpec s;
  s.name = prob.name;
  s.T = prob.T;
  s.n = prob.n;
  s.k = prob.k;
  s.domain = prob.domain;
  s.control = prob.control;
  s.xi0 = prob.xi0;
  s.params = prob.params;
  auto strings = [](const std::vector<ScalarField>& fs, const std::vector<std::string>& src) {
    if (src.size() == fs.size()) return src;
    std::vector<std::string> out;
    for (const auto& f : fs) out.push_back(f.to_string());
    return out;
  };
  s.f = strings(prob.f, prob.sources.f);
  s.f0 = strings(prob.f0, prob.sources.f0);
  s.g0 = strings(prob.g0, prob.sources.g0);
  s.g = strings(prob.g, prob.sources.g);
  s.h = strings(prob.h, prob.sources.h);
  return s;
}

// ---------------------------------------------------------------------------

std::vector<double> process_corners(const Process& proc) {
  return union_corners(proc.state.horizon(), proc.state.corners(), proc.control.corners());
}

NormalizedPath along(const Process& proc, std::size_t dim,
                     std::function<Vec(double, const Vec&, const Vec&)> fn) {
  const double T = proc.state.horizon();
  const auto cs = process_corners(proc);
  auto shared = std::make_shared<std::function<Vec(double, const Vec&, const Vec&)>>(std::move(fn));
  // paths are copied so the result outlives the process
  auto st = std::make_shared<PiecewiseC1Path>(proc.state);
  auto ct = std::make_shared<NormalizedPath>(proc.control);
  std::vector<SegmentPtr> segs;
  for (std::size_t i = 0; i <= cs.size(); ++i) {
    const double a = i == 0 ? 0.0 : cs[i - 1];
    const double b = i == cs.size() ? T : cs[i];
    const double mid = 0.5 * (a + b);
    const std::size_t si = proc.state.locate(mid);
    const std::size_t ci = proc.control.locate(mid);
    std::vector<double> bps;
    for (double bp : proc.state.segment(si).breakpoints()) {
      if (bp > a && bp < b) bps.push_back(bp);
    }
    for (double bp : proc.control.segment(ci).breakpoints()) {
      if (bp > a && bp < b) bps.push_back(bp);
    }
    std::sort(bps.begin(), bps.end());
    segs.push_back(std::make_shared<FunctionSegment>(
        dim,
        [st, ct, si, ci, a, b, shared](double t) {
          const double tc = std::clamp(t, a, b);
          return (*shared)(tc, st->value_in(si, tc), ct->value_in(ci, tc));
        },
        FunctionSegment::Fn{}, std::move(bps)));
  }
  return NormalizedPath(T, cs, std::move(segs));
}

namespace {

void check_compatible(const BolzaProblem& prob, const Process& proc) {
  if (static_cast<int>(proc.state.dim()) != prob.n) throw ProblemError("state dimension mismatch");
  if (static_cast<int>(proc.control.dim()) != prob.k) throw ProblemError("control dimension mismatch");
  const double T = prob.T;
  if (std::abs(proc.state.horizon() - T) > 1e-12 * T ||
      std::abs(proc.control.horizon() - T) > 1e-12 * T) {
    throw ProblemError("process horizon does not match the problem");
  }
}

}  // namespace

Vec evaluate_objectives(const BolzaProblem& prob, const Process& proc, double quad_tol) {
  check_compatible(prob, proc);
  if (prob.domain) {
    for (const auto& gp : evaluation_grid(prob.T, proc.state.corners(), 2001)) {
      if (!prob.domain->contains(proc.state.value(gp.t, gp.side))) {
        throw ProblemError("state leaves the domain at t=" + std::to_string(gp.t));
      }
    }
  }
  Vec J = prob.terminal_objectives(proc.state.value(prob.T));
  if (!prob.is_mayer()) {
    auto run = along(proc, static_cast<std::size_t>(prob.l()),
                     [&prob](double t, const Vec& x, const Vec& u) { return prob.running(t, x, u); });
    J += integrate(run, 0.0, prob.T, quad_tol);
  }
  return J;
}

AdmissibilityReport check_admissible(const BolzaProblem& prob, const Process& proc,
                                     const AdmissibilityTolerances& tol) {
  check_compatible(prob, proc);
  AdmissibilityReport rep;
  rep.tol = tol;
  rep.initial_residual = (proc.state.value(0.0) - prob.xi0).lpNorm<Eigen::Infinity>();
  const auto cs = process_corners(proc);
  for (const auto& gp : evaluation_grid(prob.T, cs, tol.grid_points)) {
    const Vec x = proc.state.value(gp.t, gp.side);
    const Vec u = proc.control.value(gp.t, gp.side);
    const Vec dx = proc.state.derivative(gp.t, gp.side);
    if (prob.domain && !prob.domain->contains(x)) rep.in_domain = false;
    if (!prob.control.contains(u, tol.control)) rep.control_in_set = false;
    double r;
    try {
      r = (dx - prob.dynamics(gp.t, x, u)).lpNorm<Eigen::Infinity>();
    } catch (const expr::EvalError&) {
      r = std::numeric_limits<double>::infinity();
    }
    if (std::isnan(r)) r = std::numeric_limits<double>::infinity();
    if (r > rep.dynamics_residual) {
      rep.dynamics_residual = r;
      rep.dynamics_argmax_t = gp.t;
    }
  }
  const Vec xT = proc.state.value(prob.T);
  const Vec gv = prob.inequalities(xT);
  for (int a = 0; a < prob.m(); ++a) {
    if (gv(a) < -tol.ineq) rep.ineq_violations.emplace_back(a, gv(a));
  }
  const Vec hv = prob.equalities(xT);
  bool eq_ok = true;
  for (int b = 0; b < prob.q(); ++b) {
    rep.eq_residuals.emplace_back(b, hv(b));
    if (std::abs(hv(b)) > tol.eq) eq_ok = false;
  }
  rep.admissible = rep.dynamics_residual <= tol.dynamics && rep.initial_residual <= tol.initial &&
                   rep.ineq_violations.empty() && eq_ok && rep.in_domain && rep.control_in_set;
  return rep;
}

PartialDifferentials partial_differentials(const BolzaProblem& prob, double t, const Vec& x,
                                           const Vec& u, bool with_control) {
  if (with_control && prob.control.kind() == ControlSet::Kind::Finite) {
    throw ProblemError("control partials are unavailable for a finite control set");
  }
  const int n = prob.n, k = prob.k, l = prob.l();
  PartialDifferentials d;
  d.D2f.resize(n, n);
  d.D2f0.resize(l, n);
  for (int i = 0; i < n; ++i) {
    const auto& fi = prob.f[static_cast<std::size_t>(i)];
    d.D2f.row(i) = fi.grad_x(t, x, u).transpose();
    d.finite_differences = d.finite_differences || fi.nonsmooth_x();
  }
  for (int i = 0; i < l; ++i) {
    const auto& fi = prob.f0[static_cast<std::size_t>(i)];
    d.D2f0.row(i) = fi.grad_x(t, x, u).transpose();
    d.finite_differences = d.finite_differences || fi.nonsmooth_x();
  }
  if (with_control) {
    d.D3f.resize(n, k);
    d.D3f0.resize(l, k);
    for (int i = 0; i < n; ++i) {
      const auto& fi = prob.f[static_cast<std::size_t>(i)];
      d.D3f.row(i) = fi.grad_u(t, x, u).transpose();
      d.finite_differences = d.finite_differences || fi.nonsmooth_u();
    }
    for (int i = 0; i < l; ++i) {
      const auto& fi = prob.f0[static_cast<std::size_t>(i)];
      d.D3f0.row(i) = fi.grad_u(t, x, u).transpose();
      d.finite_differences = d.finite_differences || fi.nonsmooth_u();
    }
  }
  return d;
}

TerminalDifferentials terminal_differentials(const BolzaProblem& prob, const Vec& xT) {
  return {grad_rows(prob.g0, prob.n, xT), grad_rows(prob.g, prob.n, xT),
          grad_rows(prob.h, prob.n, xT)};
}

// ---------------------------------------------------------------------------

PiecewiseC1Path integrate_state(const BolzaProblem& prob, const NormalizedPath& control,
                                const Vec& xi0, std::size_t steps) {
  const double T = prob.T;
  steps = std::max<std::size_t>(steps, 1);
  const double eps = 1e-12 * T;
  const auto& cs = control.corners();
  std::vector<SegmentPtr> segs;
  Vec x = xi0;
  for (std::size_t i = 0; i <= cs.size(); ++i) {
    const double a = i == 0 ? 0.0 : cs[i - 1];
    const double b = i == cs.size() ? T : cs[i];
    // nodes: uniform grid of the whole horizon restricted to [a, b], plus control breakpoints
    std::vector<double> nodes{a, b};
    for (std::size_t j = 1; j < steps; ++j) {
      const double t = T * static_cast<double>(j) / static_cast<double>(steps);
      if (t > a + eps && t < b - eps) nodes.push_back(t);
    }
    for (double bp : control.segment(i).breakpoints()) {
      if (bp > a + eps && bp < b - eps) nodes.push_back(bp);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [eps](double p, double q) { return q - p <= eps; }),
                nodes.end());
    if (nodes.back() != b) nodes.back() = b;
    auto rhs = [&](double t, const Vec& y) {
      Vec d = prob.dynamics(t, y, control.value_in(i, t));
      if (!d.allFinite()) throw ProblemError("non-finite state derivative at t=" + std::to_string(t));
      return d;
    };
    auto rk4 = [&](double t0, const Vec& y, const Vec& k1, double h) {
      const Vec k2 = rhs(t0 + 0.5 * h, y + 0.5 * h * k1);
      const Vec k3 = rhs(t0 + 0.5 * h, y + 0.5 * h * k2);
      const Vec k4 = rhs(t0 + h, y + h * k3);
      return Vec(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };
    std::vector<Vec> vals{x}, ders{rhs(a, x)}, mids, mid_ders;
    for (std::size_t j = 1; j < nodes.size(); ++j) {
      const double t0 = nodes[j - 1], h = nodes[j] - t0;
      const Vec xm = rk4(t0, x, ders.back(), 0.5 * h);
      mids.push_back(xm);
      mid_ders.push_back(rhs(t0 + 0.5 * h, xm));
      x = rk4(t0, x, ders.back(), h);
      vals.push_back(x);
      ders.push_back(rhs(nodes[j], x));
    }
    segs.push_back(std::make_shared<QuinticSegment>(nodes, std::move(vals), std::move(ders),
                                                    std::move(mids), std::move(mid_ders)));
  }
  return PiecewiseC1Path(T, cs, std::move(segs));
}

Process simulate(const BolzaProblem& prob, const NormalizedPath& control, std::size_t steps) {
  return {integrate_state(prob, control, prob.xi0, steps), control};
}

}  // namespace mocp
