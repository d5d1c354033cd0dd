#include "mocp/pontryagin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mocp/parallel.hpp"
#include "box_max.hpp"

namespace mocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using detail::Candidate;
using detail::linspace;
using detail::maximize_over_box;

Vec adjoint_rhs(const BolzaProblem& prob, double t, const Vec& x, const Vec& u, const Vec& p,
                const Vec& theta, bool bolza) {
  const auto d = partial_differentials(prob, t, x, u, false);
  Vec r = -d.D2f.transpose() * p;
  if (bolza && theta.size() > 0) r -= d.D2f0.transpose() * theta;
  return r;
}

Vec grad_u_hamiltonian(const BolzaProblem& prob, double t, const Vec& x, const Vec& u,
                       const Vec& p, const Vec& theta, bool bolza) {
  const auto d = partial_differentials(prob, t, x, u, true);
  Vec g = d.D3f.transpose() * p;
  if (bolza && theta.size() > 0) g += d.D3f0.transpose() * theta;
  return g;
}

std::vector<double> step_nodes(double a, double b, double T, std::size_t steps,
                               const std::vector<double>& extra) {
  const double eps = 1e-12 * T;
  std::vector<double> nodes{a, b};
  for (std::size_t j = 1; j < steps; ++j) {
    const double t = T * static_cast<double>(j) / static_cast<double>(steps);
    if (t > a + eps && t < b - eps) nodes.push_back(t);
  }
  for (double bp : extra) {
    if (bp > a + eps && bp < b - eps) nodes.push_back(bp);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(), [eps](double p, double q) { return q - p <= eps; }),
              nodes.end());
  nodes.back() = b;
  return nodes;
}

}  // namespace

// ---------------------------------------------------------------------------

bool ConditionReport::all_pass() const {
  for (const auto* r : results()) {
    if (!r->pass) return false;
  }
  return true;
}

std::vector<const ConditionResult*> ConditionReport::results() const {
  return {&nn, &si, &sl, &tc, &ae, &mp, &ch};
}

std::vector<std::string> ConditionReport::failed() const {
  std::vector<std::string> out;
  for (const auto* r : results()) {
    if (!r->pass) out.push_back(r->name);
  }
  return out;
}

double hamiltonian_mayer(const BolzaProblem& prob, double t, const Vec& x, const Vec& u,
                         const Vec& p) {
  double h = 0.0;
  for (int j = 0; j < prob.n; ++j) h += p(j) * prob.f[static_cast<std::size_t>(j)].value(t, x, u);
  return h;
}

double hamiltonian_bolza(const BolzaProblem& prob, double t, const Vec& x, const Vec& u,
                         const Vec& p, const Vec& theta) {
  double h = hamiltonian_mayer(prob, t, x, u, p);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (theta(i) != 0.0) h += theta(i) * prob.f0[static_cast<std::size_t>(i)].value(t, x, u);
  }
  return h;
}

Vec transversality_value(const BolzaProblem& prob, const Vec& xT, const Vec& theta,
                         const Vec& lambda, const Vec& mu) {
  const auto td = terminal_differentials(prob, xT);
  Vec v = Vec::Zero(prob.n);
  if (theta.size() > 0) v += td.Dg0.transpose() * theta;
  if (lambda.size() > 0) v += td.Dg.transpose() * lambda;
  if (mu.size() > 0) v += td.Dh.transpose() * mu;
  return v;
}

PiecewiseC1Path integrate_adjoint(const BolzaProblem& prob, const Process& proc, const Vec& pT,
                                  const Vec& theta, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("adjoint step must be positive");
  if (pT.size() != prob.n) throw std::invalid_argument("pT has the wrong dimension");
  const double T = prob.T;
  const auto cs = process_corners(proc);
  const auto steps = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
  std::vector<SegmentPtr> segs(cs.size() + 1);
  Vec p = pT;
  for (std::size_t ii = cs.size() + 1; ii-- > 0;) {
    const double a = ii == 0 ? 0.0 : cs[ii - 1];
    const double b = ii == cs.size() ? T : cs[ii];
    const double mid = 0.5 * (a + b);
    const std::size_t si = proc.state.locate(mid), ci = proc.control.locate(mid);
    std::vector<double> extra = proc.state.segment(si).breakpoints();
    for (double bp : proc.control.segment(ci).breakpoints()) extra.push_back(bp);
    const auto nodes = step_nodes(a, b, T, steps, extra);
    auto rhs = [&](double t, const Vec& y) {
      Vec r = adjoint_rhs(prob, t, proc.state.value_in(si, t), proc.control.value_in(ci, t), y,
                          theta, true);
      if (!r.allFinite()) {
        throw std::runtime_error("non-finite adjoint derivative at t=" + std::to_string(t));
      }
      return r;
    };
    auto rk4 = [&](double t0, const Vec& y, const Vec& k1, double h) {
      const Vec k2 = rhs(t0 + 0.5 * h, y + 0.5 * h * k1);
      const Vec k3 = rhs(t0 + 0.5 * h, y + 0.5 * h * k2);
      const Vec k4 = rhs(t0 + h, y + h * k3);
      return Vec(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    };
    const std::size_t N = nodes.size();
    std::vector<Vec> vals(N), ders(N), mids(N - 1), mid_ders(N - 1);
    vals[N - 1] = p;
    ders[N - 1] = rhs(b, p);
    for (std::size_t j = N - 1; j-- > 0;) {
      const double t1 = nodes[j + 1], h = nodes[j] - t1;  // negative
      const Vec pm = rk4(t1, p, ders[j + 1], 0.5 * h);
      mids[j] = pm;
      mid_ders[j] = rhs(t1 + 0.5 * h, pm);
      p = rk4(t1, p, ders[j + 1], h);
      vals[j] = p;
      ders[j] = rhs(nodes[j], p);
    }
    segs[ii] = std::make_shared<QuinticSegment>(nodes, std::move(vals), std::move(ders),
                                                std::move(mids), std::move(mid_ders));
  }
  return PiecewiseC1Path(T, cs, std::move(segs));
}

// ---------------------------------------------------------------------------

namespace {

struct PointResult {
  double ae = 0.0;
  double mp = 0.0;
  Vec mp_control;
};

}  // namespace

ConditionReport check_conditions(const BolzaProblem& prob, const Process& proc,
                                 const MultiplierSet& mult, const CheckConfig& cfg) {
  const bool bolza = cfg.form == HamiltonianForm::Bolza;
  const Vec& theta = mult.theta;
  const auto& P = mult.adjoint;
  if (theta.size() != prob.l() || mult.lambda.size() != prob.m() || mult.mu.size() != prob.q()) {
    throw std::invalid_argument("multiplier dimensions do not match the problem");
  }
  if (static_cast<int>(P.dim()) != prob.n) throw std::invalid_argument("adjoint has the wrong dimension");
  const Vec theta_h = bolza ? theta : Vec();
  auto ham = [&](double t, const Vec& x, const Vec& u, const Vec& p) {
    return bolza ? hamiltonian_bolza(prob, t, x, u, p, theta) : hamiltonian_mayer(prob, t, x, u, p);
  };

  ConditionReport rep;
  const auto& tol = cfg.tol;
  auto finish = [](ConditionResult& r, const char* name, double residual, double t) {
    r.name = name;
    r.residual = residual;
    r.tol = t;
    r.pass = residual <= t;
  };

  finish(rep.nn, "NN", std::max(0.0, 1.0 - mult.norm()), tol.nn);

  double si = 0.0;
  if (theta.size() > 0) si = std::max(si, -theta.minCoeff());
  if (mult.lambda.size() > 0) si = std::max(si, -mult.lambda.minCoeff());
  finish(rep.si, "Si", si, tol.si);

  const Vec xT = proc.state.value(prob.T);
  const Vec gT = prob.inequalities(xT);
  double sl = 0.0;
  for (int a = 0; a < prob.m(); ++a) sl = std::max(sl, std::abs(mult.lambda(a) * gT(a)));
  finish(rep.sl, "Sl", sl, tol.sl);

  const Vec tv = transversality_value(prob, xT, theta, mult.lambda, mult.mu);
  finish(rep.tc, "TC", (P.value(prob.T) - tv).norm(), tol.tc);

  std::vector<double> corners = process_corners(proc);
  corners = union_corners(prob.T, corners, P.corners());
  const auto grid = evaluation_grid(prob.T, corners, cfg.grid_points);
  const auto kind = prob.control.kind();

  auto results = parallel_map<PointResult>(grid.size(), cfg.jobs, [&](std::size_t gi) {
    const auto& gp = grid[gi];
    const Vec x = proc.state.value(gp.t, gp.side);
    const Vec u = proc.control.value(gp.t, gp.side);
    const Vec p = P.value(gp.t, gp.side);
    PointResult r;
    r.ae = (P.derivative(gp.t, gp.side) - adjoint_rhs(prob, gp.t, x, u, p, theta, bolza)).norm();
    const double h0 = ham(gp.t, x, u, p);
    auto hz = [&](const Vec& z) {
      try {
        return ham(gp.t, x, z, p);
      } catch (const expr::EvalError&) {
        return -kInf;
      }
    };
    Candidate best{h0, u};
    switch (kind) {
      case ControlSet::Kind::Finite:
        for (const auto& z : prob.control.points()) {
          const double v = hz(z);
          if (v > best.value) best = {v, z};
        }
        break;
      case ControlSet::Kind::Box:
        best = maximize_over_box(hz, prob.control.lower(), prob.control.upper(), u, cfg.box_grid,
                                 cfg.mp_refine_tol);
        break;
      case ControlSet::Kind::Free: {
        const Vec radius = Vec::Constant(u.size(), cfg.free_radius);
        best = maximize_over_box(hz, Vec(u - radius), Vec(u + radius), u, cfg.free_grid,
                                 cfg.mp_refine_tol);
        break;
      }
    }
    r.mp = std::max(0.0, best.value - h0);
    r.mp_control = best.u;
    if (kind == ControlSet::Kind::Free) {
      const double g = grad_u_hamiltonian(prob, gp.t, x, u, p, theta, bolza).norm();
      if (g > r.mp) {
        r.mp = g;
        r.mp_control = u;
      }
    }
    return r;
  });

  double ae = 0.0, mp = 0.0;
  std::size_t ae_at = 0, mp_at = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const double a = std::isnan(results[i].ae) ? kInf : results[i].ae;
    const double m = std::isnan(results[i].mp) ? kInf : results[i].mp;
    if (a > ae) {
      ae = a;
      ae_at = i;
    }
    if (m > mp) {
      mp = m;
      mp_at = i;
    }
  }
  finish(rep.ae, "AE", ae, tol.ae);
  rep.ae.argmax_t = grid.empty() ? 0.0 : grid[ae_at].t;
  finish(rep.mp, "MP", mp, tol.mp);
  if (!grid.empty()) {
    rep.mp.argmax_t = grid[mp_at].t;
    rep.mp.argmax_control = results[mp_at].mp_control;
  }

  double ch = 0.0;
  std::optional<double> ch_at;
  for (double c : corners) {
    const double hl = ham(c, proc.state.value(c, Side::Left), proc.control.value(c, Side::Left),
                          P.value(c, Side::Left));
    const double hr = ham(c, proc.state.value(c, Side::Right), proc.control.value(c, Side::Right),
                          P.value(c, Side::Right));
    const double jump = std::abs(hl - hr);
    if (!ch_at || jump > ch) {
      ch = jump;
      ch_at = c;
    }
  }
  finish(rep.ch, "CH", ch, tol.ch);
  rep.ch.argmax_t = ch_at;
  return rep;
}

// ---------------------------------------------------------------------------
// multiplier recovery

namespace {

// F(w) = |E w|^2 + |max(0, U w)|^2 over the cone w_j >= 0 for j < nonneg.
struct Objective {
  Mat E;
  Mat U;
  int nonneg = 0;

  double value(const Vec& w) const {
    double f = (E * w).squaredNorm();
    if (U.rows() > 0) f += (U * w).cwiseMax(0.0).squaredNorm();
    return f;
  }
  Vec gradient(const Vec& w) const {
    Vec g = 2.0 * E.transpose() * (E * w);
    if (U.rows() > 0) g += 2.0 * U.transpose() * (U * w).cwiseMax(0.0);
    return g;
  }
  double lipschitz() const {
    Mat Q = E.transpose() * E;
    if (U.rows() > 0) Q += U.transpose() * U;
    Eigen::SelfAdjointEigenSolver<Mat> es(Q);
    return 2.0 * std::max(es.eigenvalues().maxCoeff(), 1e-300);
  }
  void project_cone(Vec& w) const {
    for (int j = 0; j < nonneg; ++j) w(j) = std::max(0.0, w(j));
  }
  bool feasible(const Vec& w) const {
    for (int j = 0; j < nonneg; ++j) {
      if (w(j) < 0.0) return false;
    }
    return true;
  }
  // Quadratic form of the equality rows and of the hinge rows active at w.
  Mat active_form(const Vec& w) const {
    Mat Q = E.transpose() * E;
    if (U.rows() > 0) {
      const Vec uw = U * w;
      const double scale = std::max(1.0, uw.cwiseAbs().maxCoeff());
      for (Eigen::Index r = 0; r < U.rows(); ++r) {
        if (uw(r) > -1e-10 * scale) Q += U.row(r).transpose() * U.row(r);
      }
    }
    return Q;
  }
};

// theta_j = 1 gauge: convex problem solved by FISTA, then an active-set polish.
Vec solve_theta_gauge(const Objective& obj, int j, std::size_t iterations) {
  const auto d = obj.E.cols();
  auto fix = [&](Vec& w) {
    obj.project_cone(w);
    w(j) = 1.0;
  };
  const double L = obj.lipschitz();
  Vec w = Vec::Zero(d);
  fix(w);
  Vec y = w, prev = w;
  double tk = 1.0;
  double f_prev = obj.value(prev);
  for (std::size_t it = 0; it < iterations; ++it) {
    Vec next = y - obj.gradient(y) / L;
    fix(next);
    const double f_next = obj.value(next);
    if (f_next > f_prev) {
      // adaptive restart
      tk = 1.0;
      y = prev;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    y = next + ((tk - 1.0) / tn) * (next - prev);
    prev = next;
    f_prev = f_next;
    tk = tn;
  }
  w = prev;
  // polish: least squares on the active set with w_j = 1 and zero coordinates held
  for (int round = 0; round < 3; ++round) {
    const Mat Q = obj.active_form(w);
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i == j) continue;
      if (i < obj.nonneg && w(i) <= 1e-12) continue;
      free_idx.push_back(i);
    }
    Vec cand = w;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (i != j && i < obj.nonneg && w(i) <= 1e-12) cand(i) = 0.0;
    }
    if (!free_idx.empty()) {
      const auto f = static_cast<Eigen::Index>(free_idx.size());
      Mat A(f, f);
      Vec rhs(f);
      for (Eigen::Index r = 0; r < f; ++r) {
        rhs(r) = -Q(free_idx[static_cast<std::size_t>(r)], j);
        for (Eigen::Index c = 0; c < f; ++c) {
          A(r, c) = Q(free_idx[static_cast<std::size_t>(r)], free_idx[static_cast<std::size_t>(c)]);
        }
      }
      const Vec sol = A.completeOrthogonalDecomposition().solve(rhs);
      for (Eigen::Index r = 0; r < f; ++r) cand(free_idx[static_cast<std::size_t>(r)]) = sol(r);
    }
    cand(j) = 1.0;
    if (!obj.feasible(cand) || !cand.allFinite()) break;
    if (obj.value(cand) <= obj.value(w) * (1.0 + 1e-12) + 1e-300) {
      const bool same = (cand - w).norm() <= 1e-15 * (1.0 + w.norm());
      w = cand;
      if (same) break;
    } else {
      break;
    }
  }
  return w;
}

// Unit sphere gauge on the cone: projected gradient from several starts, then
// a minimum-eigenvector polish on the active set.
Vec solve_unit_gauge(const Objective& obj, const std::vector<Vec>& seeds, std::size_t iterations) {
  const auto d = obj.E.cols();
  const double L = obj.lipschitz();
  Vec best;
  double best_val = kInf;
  auto consider = [&](const Vec& w) {
    if (!w.allFinite() || !obj.feasible(w)) return;
    const double v = obj.value(w);
    if (v < best_val) {
      best_val = v;
      best = w;
    }
  };
  for (Vec w : seeds) {
    obj.project_cone(w);
    if (w.norm() == 0.0) continue;
    w.normalize();
    const std::size_t iters = std::max<std::size_t>(iterations / 4, 1);
    for (std::size_t it = 0; it < iters; ++it) {
      Vec next = w - obj.gradient(w) / L;
      obj.project_cone(next);
      const double nn = next.norm();
      if (nn == 0.0) break;
      next /= nn;
      const bool done = (next - w).norm() <= 1e-15;
      w = next;
      if (done) break;
    }
    consider(w);
    // polish
    for (int round = 0; round < 3 && w.size() == d; ++round) {
      const Mat Q = obj.active_form(w);
      std::vector<Eigen::Index> free_idx;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (i < obj.nonneg && w(i) <= 1e-12) continue;
        free_idx.push_back(i);
      }
      if (free_idx.empty()) break;
      const auto f = static_cast<Eigen::Index>(free_idx.size());
      Mat A(f, f);
      for (Eigen::Index r = 0; r < f; ++r) {
        for (Eigen::Index c = 0; c < f; ++c) {
          A(r, c) = Q(free_idx[static_cast<std::size_t>(r)], free_idx[static_cast<std::size_t>(c)]);
        }
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(A);
      Vec v = es.eigenvectors().col(0);
      Vec cand = Vec::Zero(d);
      for (Eigen::Index r = 0; r < f; ++r) cand(free_idx[static_cast<std::size_t>(r)]) = v(r);
      if (cand.dot(w) < 0.0) cand = -cand;
      if (!obj.feasible(cand)) break;
      if (obj.value(cand) <= obj.value(w) * (1.0 + 1e-12) + 1e-300) {
        const bool same = (cand - w).norm() <= 1e-14;
        w = cand;
        consider(w);
        if (same) break;
      } else {
        break;
      }
    }
  }
  if (best.size() == 0) throw RecoveryError("multiplier search found no feasible point");
  return best;
}

}  // namespace

RecoveryResult recover_multipliers(const BolzaProblem& prob, const Process& proc,
                                   const Gauge& gauge, const RecoveryConfig& cfg) {
  const int l = prob.l(), m = prob.m(), q = prob.q(), n = prob.n, k = prob.k;
  const int d = l + m + q;
  if (gauge.kind == Gauge::Kind::ThetaOne && (gauge.j < 0 || gauge.j >= l)) {
    throw RecoveryError("gauge objective index out of range");
  }
  const double T = prob.T;
  const Vec xT = proc.state.value(T);
  const auto td = terminal_differentials(prob, xT);
  Mat B(n, d);  // p(T) = B w
  if (l > 0) B.leftCols(l) = td.Dg0.transpose();
  if (m > 0) B.middleCols(l, m) = td.Dg.transpose();
  if (q > 0) B.rightCols(q) = td.Dh.transpose();

  // basis adjoints: p(w) = sum_j w_j p_j
  std::vector<PiecewiseC1Path> basis;
  basis.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    Vec th = Vec::Zero(l);
    if (j < l) th(j) = 1.0;
    basis.push_back(integrate_adjoint(prob, proc, B.col(j), th, cfg.adjoint_step));
  }

  std::vector<Vec> eq_rows, hinge_rows;
  const std::size_t N = std::max<std::size_t>(cfg.points, 1);
  const double weight = std::sqrt(1.0 / static_cast<double>(N));
  const auto kind = prob.control.kind();
  for (std::size_t s = 0; s < N; ++s) {
    const double t = T * (static_cast<double>(s) + 0.5) / static_cast<double>(N);
    const Vec x = proc.state.value(t), u = proc.control.value(t);
    Mat Pj(n, d);
    for (int j = 0; j < d; ++j) Pj.col(j) = basis[static_cast<std::size_t>(j)].value(t);
    if (kind == ControlSet::Kind::Finite) {
      const Vec fu = prob.dynamics(t, x, u), f0u = prob.running(t, x, u);
      for (const auto& z : prob.control.points()) {
        if ((z - u).lpNorm<Eigen::Infinity>() <= 1e-12) continue;
        const Vec df = prob.dynamics(t, x, z) - fu;
        const Vec df0 = prob.running(t, x, z) - f0u;
        Vec row = Pj.transpose() * df;
        row.head(l) += df0;
        hinge_rows.push_back(weight * row);
      }
      continue;
    }
    const auto pd = partial_differentials(prob, t, x, u, true);
    Mat G = pd.D3f.transpose() * Pj;  // k x d
    G.leftCols(l) += pd.D3f0.transpose();
    for (int i = 0; i < k; ++i) {
      const Vec row = G.row(i).transpose();
      if (kind == ControlSet::Kind::Box) {
        const double lo = prob.control.lower()(i), hi = prob.control.upper()(i);
        const double eps = 1e-9 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
        const bool at_hi = u(i) >= hi - eps, at_lo = u(i) <= lo + eps;
        if (at_hi && at_lo) continue;
        if (at_hi) {
          hinge_rows.push_back(-weight * row);  // need dH/du_i >= 0
          continue;
        }
        if (at_lo) {
          hinge_rows.push_back(weight * row);  // need dH/du_i <= 0
          continue;
        }
      }
      eq_rows.push_back(weight * row);
    }
  }
  const Vec gT = prob.inequalities(xT);
  for (int a = 0; a < m; ++a) {
    Vec row = Vec::Zero(d);
    row(l + a) = gT(a);
    eq_rows.push_back(row);
  }

  Objective obj;
  obj.nonneg = l + m;
  obj.E = Mat::Zero(static_cast<Eigen::Index>(eq_rows.size()), d);
  for (std::size_t r = 0; r < eq_rows.size(); ++r) obj.E.row(static_cast<Eigen::Index>(r)) = eq_rows[r].transpose();
  obj.U = Mat::Zero(static_cast<Eigen::Index>(hinge_rows.size()), d);
  for (std::size_t r = 0; r < hinge_rows.size(); ++r) obj.U.row(static_cast<Eigen::Index>(r)) = hinge_rows[r].transpose();

  // unit-gauge solution (also used to detect an infeasible theta gauge)
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::vector<Vec> seeds;
  for (int j = 0; j < l; ++j) {
    Vec w = solve_theta_gauge(obj, j, cfg.iterations);
    seeds.push_back(w / w.norm());
  }
  for (std::size_t s = 0; s < cfg.starts; ++s) {
    Vec w(d);
    for (int i = 0; i < d; ++i) w(i) = normal(rng);
    seeds.push_back(w);
  }
  const Vec unit = solve_unit_gauge(obj, seeds, cfg.iterations);

  Vec w = unit;
  if (gauge.kind == Gauge::Kind::ThetaOne) {
    const int j = gauge.j;
    w = solve_theta_gauge(obj, j, cfg.iterations);
    const double scaled = obj.value(w) / w.squaredNorm();
    const double base = obj.value(unit);
    if (std::abs(unit(j)) <= 1e-6 && scaled > 100.0 * base + 1e-14) {
      throw GaugeInfeasible("theta_" + std::to_string(j + 1) +
                            " vanishes at the best multipliers; the theta gauge is infeasible");
    }
  }
  if (!w.allFinite()) throw RecoveryError("multiplier search produced non-finite values");

  RecoveryResult out{MultiplierSet{w.head(l), w.segment(l, m), w.tail(q),
                                   integrate_adjoint(prob, proc, B * w, w.head(l), cfg.adjoint_step)},
                     {}, obj.value(w)};
  out.report = check_conditions(prob, proc, out.multipliers, cfg.check);
  return out;
}

}  // namespace mocp
