#include "mocp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "box_max.hpp"
#include "mocp/parallel.hpp"

namespace mocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

NormalizedPath control_path(const BolzaProblem& prob, const std::vector<double>& nodes,
                            const std::vector<Vec>& values) {
  const double T = prob.T;
  if (prob.control.kind() != ControlSet::Kind::Finite) {
    return NormalizedPath(T, {}, {std::make_shared<SampledSegment>(nodes, values, std::vector<Vec>{},
                                                                   Interpolation::Linear)});
  }
  // piecewise constant: values[i] on [t_i, t_{i+1})
  std::vector<double> corners;
  std::vector<SegmentPtr> segs{PolynomialSegment::constant(values[0])};
  for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
    if ((values[i] - values[i - 1]).norm() > 0.0) {
      corners.push_back(nodes[i]);
      segs.push_back(PolynomialSegment::constant(values[i]));
    }
  }
  return NormalizedPath(T, corners, segs);
}

// Terminal payoff of the augmented Lagrangian and its multiplier estimates.
struct Penalty {
  Vec lambda, mu;
  double rho = 1.0;

  Vec lambda_at(const Vec& g) const { return (lambda - rho * g).cwiseMax(0.0); }
  Vec mu_at(const Vec& h) const { return mu - rho * h; }
  double value(const Vec& g, const Vec& h) const {
    const Vec s = (lambda - rho * g).cwiseMax(0.0);
    return -(s.squaredNorm() - lambda.squaredNorm()) / (2.0 * rho) + mu.dot(h) -
           0.5 * rho * h.squaredNorm();
  }
};

// Unit-norm multipliers with p(T) from the current multiplier estimates.
MultiplierSet unit_multipliers(const BolzaProblem& prob, const Process& proc, const Vec& theta,
                               const Penalty& pen, std::size_t steps) {
  const Vec xT = proc.state.value(prob.T);
  const Vec lam = pen.lambda_at(prob.inequalities(xT)), mu = pen.mu_at(prob.equalities(xT));
  const double s = std::sqrt(theta.squaredNorm() + lam.squaredNorm() + mu.squaredNorm());
  const Vec pT = transversality_value(prob, xT, theta / s, lam / s, mu / s);
  return {theta / s, lam / s, mu / s,
          integrate_adjoint(prob, proc, pT, theta / s, prob.T / static_cast<double>(steps))};
}

double violation(const Vec& g, const Vec& h) {
  double v = 0.0;
  if (g.size() > 0) v = std::max(v, (-g).cwiseMax(0.0).maxCoeff());
  if (h.size() > 0) v = std::max(v, h.cwiseAbs().maxCoeff());
  return v;
}

// Newton steps on the free coordinates after the grid search; a quadratic
// Hamiltonian is maximized to rounding in one step.
template <typename H>
Vec newton_polish(const BolzaProblem& prob, double t, const Vec& x, const Vec& p, const Vec& theta,
                  const Vec& center, double prox, const H& ham, Vec z) {
  const auto& U = prob.control;
  const bool box = U.kind() == ControlSet::Kind::Box;
  auto grad = [&](const Vec& v) {
    const auto d = partial_differentials(prob, t, x, v, true);
    Vec g = d.D3f.transpose() * p;
    if (theta.size() > 0) g += d.D3f0.transpose() * theta;
    if (prox > 0.0) g -= (v - center) / prox;
    return g;
  };
  const auto k = z.size();
  for (int iter = 0; iter < 8; ++iter) {
    const Vec g = grad(z);
    if (!g.allFinite()) break;
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (box && ((z(j) <= U.lower()(j) && g(j) < 0.0) || (z(j) >= U.upper()(j) && g(j) > 0.0))) continue;
      free.push_back(j);
    }
    const auto m = static_cast<Eigen::Index>(free.size());
    if (m == 0) break;
    Vec gf(m);
    Mat Hf(m, m);
    for (Eigen::Index a = 0; a < m; ++a) gf(a) = g(free[static_cast<std::size_t>(a)]);
    if (gf.norm() <= 1e-14 * (1.0 + g.norm())) break;
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto j = free[static_cast<std::size_t>(b)];
      const double h = 1e-6 * (1.0 + std::abs(z(j)));
      Vec zp = z, zm = z;
      zp(j) += h;
      zm(j) -= h;
      const Vec col = (grad(zp) - grad(zm)) / (2.0 * h);
      for (Eigen::Index a = 0; a < m; ++a) Hf(a, b) = col(free[static_cast<std::size_t>(a)]);
    }
    Hf = 0.5 * (Hf + Hf.transpose()).eval();
    Eigen::LLT<Mat> llt(-Hf);
    if (llt.info() != Eigen::Success) break;
    const Vec step = llt.solve(gf);
    Vec next = z;
    for (Eigen::Index a = 0; a < m; ++a) next(free[static_cast<std::size_t>(a)]) += step(a);
    if (box) next = next.cwiseMax(U.lower()).cwiseMin(U.upper());
    const double h0 = ham(z), h1 = ham(next);
    if (!(h1 >= h0 - 1e-12 * (1.0 + std::abs(h0)))) break;
    const double moved = (next - z).norm();
    z = next;
    if (moved <= 1e-15 * (1.0 + z.norm())) break;
  }
  return z;
}

}  // namespace

void check_weight(const Vec& theta, int l) {
  if (theta.size() != l) {
    throw SolverError("weight has " + std::to_string(theta.size()) + " components, expected " +
                      std::to_string(l));
  }
  if (l == 0 || theta.minCoeff() < -1e-12 || std::abs(theta.sum() - 1.0) > 1e-12) {
    throw SolverError("weight must lie on the simplex");
  }
}

ParetoPoint solve_scalarized(const BolzaProblem& prob, const Vec& theta, const SolverConfig& cfg) {
  check_weight(theta, prob.l());
  const auto& fc = cfg.fbsm;
  if (!(fc.relaxation > 0.0 && fc.relaxation <= 1.0) || fc.steps < 2 || cfg.al.rho0 <= 0.0 ||
      cfg.al.growth < 1.0) {
    throw SolverError("invalid solver configuration");
  }
  const double T = prob.T;
  const std::size_t N = fc.steps;
  const auto& U = prob.control;
  const bool finite = U.kind() == ControlSet::Kind::Finite;

  std::vector<double> nodes(N + 1);
  for (std::size_t i = 0; i <= N; ++i) nodes[i] = T * static_cast<double>(i) / static_cast<double>(N);
  std::vector<Vec> u(N + 1, U.project(Vec::Zero(prob.k)));

  ParetoPoint pt;
  pt.weight = theta;
  double omega = finite ? 1.0 : fc.relaxation;
  const double prox_weight = finite ? 0.0 : fc.proximal;

  auto simulate_nodes = [&](const std::vector<Vec>& values) {
    NormalizedPath c = control_path(prob, nodes, values);
    return Process{integrate_state(prob, c, prob.xi0, N), c};
  };
  auto scalarized = [&](const Process& proc, const Penalty& pen) {
    const Vec xT = proc.state.value(T);
    return theta.dot(evaluate_objectives(prob, proc)) +
           pen.value(prob.inequalities(xT), prob.equalities(xT));
  };

  Penalty pen{Vec::Zero(prob.m()), Vec::Zero(prob.q()), cfg.al.rho0};
  Process proc = simulate_nodes(u);
  const bool constrained = prob.m() + prob.q() > 0;
  const std::size_t max_outer = constrained ? std::max<std::size_t>(cfg.al.max_outer, 1) : 1;
  double prev_viol = kInf;
  bool done = false;
  std::size_t outer = 0;
  for (; outer < max_outer && !done; ++outer) {
    double J_prev = scalarized(proc, pen);
    double best_J = J_prev;
    std::vector<Vec> best_u = u;
    int drops = 0;
    bool converged = false;
    for (std::size_t it = 0; it < fc.max_iters; ++it) {
      const Vec xT = proc.state.value(T);
      const Vec lam = pen.lambda_at(prob.inequalities(xT)), mu = pen.mu_at(prob.equalities(xT));
      const Vec pT = transversality_value(prob, xT, theta, lam, mu);
      const auto P = integrate_adjoint(prob, proc, pT, theta, T / static_cast<double>(N));
      std::vector<Vec> target(N + 1);
      std::vector<char> unbounded(N + 1, 0);
      parallel_for(N + 1, cfg.jobs, [&](std::size_t i) {
        const Side side = i == N ? Side::Left : Side::Right;
        const double t = nodes[i];
        const Vec x = proc.state.value(t, side), p = P.value(t, side);
        auto H = [&](const Vec& z) {
          try {
            const double prox = prox_weight > 0.0 ? (z - u[i]).squaredNorm() / (2.0 * prox_weight) : 0.0;
            return hamiltonian_bolza(prob, t, x, z, p, theta) - prox;
          } catch (const expr::EvalError&) {
            return -kInf;
          }
        };
        const auto r = detail::argmax_over(H, U, u[i], fc.argmax_grid, 1e-7, cfg.check.free_radius, 2);
        unbounded[i] = r.unbounded;
        // the proximal term bounds the update, so test the bare Hamiltonian once per outer pass
        if (!r.unbounded && it == 0 && prox_weight > 0.0 && U.kind() == ControlSet::Kind::Free) {
          auto bare = [&](const Vec& z) {
            try {
              return hamiltonian_bolza(prob, t, x, z, p, theta);
            } catch (const expr::EvalError&) {
              return -kInf;
            }
          };
          unbounded[i] = detail::argmax_over(bare, U, u[i], fc.argmax_grid, 1e-4, cfg.check.free_radius, 0)
                             .unbounded;
        }
        if (r.unbounded || finite) {
          target[i] = r.best.u;
        } else {
          target[i] = newton_polish(prob, t, x, p, theta, u[i], prox_weight, H, r.best.u);
        }
      });
      for (std::size_t i = 0; i <= N; ++i) {
        if (unbounded[i]) {
          throw SolverError("unbounded pointwise maximization of the Hamiltonian at t = " +
                            std::to_string(nodes[i]));
        }
      }
      std::vector<Vec> next(N + 1);
      double change = 0.0, scale = 1.0;
      for (std::size_t i = 0; i <= N; ++i) {
        next[i] = finite ? target[i] : Vec((1.0 - omega) * u[i] + omega * target[i]);
        change = std::max(change, (next[i] - u[i]).cwiseAbs().maxCoeff());
        scale = std::max(scale, next[i].cwiseAbs().maxCoeff());
      }
      Process cand = simulate_nodes(next);
      const double J = scalarized(cand, pen);
      ++pt.iterations;
      if (J < J_prev - 1e-12 * (1.0 + std::abs(J_prev))) {
        if (++drops >= 3) {
          omega *= 0.5;
          if (omega < fc.min_relaxation || finite) {
            pt.failed = true;
            pt.failure = "sweep diverged";
            break;
          }
          u = best_u;
          proc = simulate_nodes(u);
          J_prev = best_J;
          drops = 0;
          continue;
        }
      } else {
        drops = 0;
      }
      u = std::move(next);
      proc = std::move(cand);
      J_prev = J;
      pt.history.push_back(J);
      if (J >= best_J) {
        best_J = J;
        best_u = u;
      }
      if (change <= fc.tol * scale) {
        converged = true;
        break;
      }
      // singular arcs keep the control moving; stop once the conditions hold
      if (fc.check_every > 0 && (it + 1) % fc.check_every == 0 &&
          check_conditions(prob, proc, unit_multipliers(prob, proc, theta, pen, N), cfg.check).all_pass()) {
        converged = true;
        break;
      }
    }
    if (pt.failed) break;
    if (!converged) {
      pt.failed = true;
      pt.failure = "no convergence after " + std::to_string(fc.max_iters) + " sweeps";
      break;
    }
    const Vec xT = proc.state.value(T);
    const Vec g = prob.inequalities(xT), h = prob.equalities(xT);
    const double viol = violation(g, h);
    if (!constrained || viol <= cfg.al.feas_tol) {
      done = true;
      break;
    }
    pen.lambda = pen.lambda_at(g);
    pen.mu = pen.mu_at(h);
    if (viol > 0.05 * prev_viol || outer == 0) pen.rho = std::min(pen.rho * cfg.al.growth, cfg.al.rho_max);
    prev_viol = viol;
  }
  pt.outer_iterations = std::min(outer + 1, max_outer);
  pt.relaxation = omega;
  if (!pt.failed && !done) {
    pt.failed = true;
    pt.failure = "terminal constraints not met after " + std::to_string(max_outer) + " updates";
  }

  pt.process = proc;
  pt.objectives = evaluate_objectives(prob, proc);
  pt.multipliers = unit_multipliers(prob, proc, theta, pen, N);
  pt.necessary = check_conditions(prob, proc, pt.multipliers, cfg.check);
  if (!pt.failed && !check_admissible(prob, proc).admissible) {
    pt.failed = true;
    pt.failure = "candidate is not admissible";
  }
  if (!pt.failed && !pt.necessary.all_pass()) {
    pt.failed = true;
    std::string names;
    for (const auto& n : pt.necessary.failed()) names += " " + n;
    pt.failure = "necessary conditions fail at solver tolerances:" + names;
  }
  if (!pt.failed && cfg.certify) {
    try {
      pt.sufficiency = certify(prob, proc, pt.multipliers, Strategy::Auto, cfg.sufficiency);
    } catch (const SufficiencyError&) {
      pt.sufficiency.reset();
    }
  }
  return pt;
}

DominanceFlags dominance_filter(const std::vector<Vec>& objectives, double dom_tol) {
  const std::size_t n = objectives.size();
  DominanceFlags f{std::vector<bool>(n, false), std::vector<bool>(n, false)};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const Vec& A = objectives[a];
      const Vec& B = objectives[b];
      if (A.size() != B.size()) throw SolverError("objective vectors differ in length");
      const bool geq = ((B.array() - A.array()) >= -dom_tol).all();
      const bool some = ((B.array() - A.array()) > dom_tol).any();
      if (geq && some) f.dominated[a] = true;
      if (A.size() > 0 && ((B.array() - A.array()) > dom_tol).all()) f.weakly_dominated[a] = true;
    }
  }
  return f;
}

std::vector<Vec> weight_grid(int l, int divisions, std::size_t cap) {
  if (l <= 0) throw SolverError("weight grid needs at least one objective");
  if (l == 1) return {Vec::Ones(1)};
  auto count = [l](int d) {
    double c = 1.0;  // C(d + l - 1, l - 1)
    for (int i = 1; i < l; ++i) c = c * (d + i) / i;
    return c;
  };
  divisions = std::max(divisions, 1);
  while (divisions > 1 && count(divisions) > static_cast<double>(cap)) --divisions;
  std::vector<Vec> out;
  std::vector<int> parts(static_cast<std::size_t>(l), 0);
  // lexicographic enumeration of compositions of `divisions` into l parts
  auto rec = [&](auto&& self, int idx, int left) -> void {
    if (idx == l - 1) {
      parts[static_cast<std::size_t>(idx)] = left;
      Vec w(l);
      for (int i = 0; i < l; ++i) w(i) = static_cast<double>(parts[static_cast<std::size_t>(i)]) / divisions;
      out.push_back(w);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[static_cast<std::size_t>(idx)] = v;
      self(self, idx + 1, left - v);
    }
  };
  rec(rec, 0, divisions);
  return out;
}

ParetoFront sweep_front(const BolzaProblem& prob, const std::vector<Vec>& weights,
                        const SolverConfig& cfg) {
  if (weights.empty()) throw SolverError("weight grid is empty");
  std::vector<std::size_t> order(weights.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(weights[a].data(), weights[a].data() + weights[a].size(),
                                        weights[b].data(), weights[b].data() + weights[b].size());
  });
  SolverConfig inner = cfg;
  inner.jobs = 1;
  inner.check.jobs = 1;
  inner.sufficiency.jobs = 1;
  std::vector<std::optional<ParetoPoint>> results(weights.size());
  std::vector<std::string> errors(weights.size());
  parallel_for(weights.size(), cfg.jobs, [&](std::size_t i) {
    try {
      results[i] = solve_scalarized(prob, weights[order[i]], inner);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  ParetoFront front;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (results[i] && !results[i]->failed) {
      front.points.push_back(std::move(*results[i]));
    } else {
      front.failed_weights.push_back(weights[order[i]]);
      front.failures.push_back(results[i] ? results[i]->failure : errors[i]);
    }
  }
  std::vector<Vec> objs;
  for (const auto& p : front.points) objs.push_back(p.objectives);
  const auto flags = dominance_filter(objs, cfg.dom_tol);
  for (std::size_t i = 0; i < front.points.size(); ++i) {
    front.points[i].dominated = flags.dominated[i];
    front.points[i].weakly_dominated = flags.weakly_dominated[i];
  }
  return front;
}

}  // namespace mocp
