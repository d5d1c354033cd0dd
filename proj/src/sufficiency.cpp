#include "mocp/sufficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "box_max.hpp"
#include "mocp/parallel.hpp"
#include "mocp/random.hpp"

namespace mocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const ScalarFn& fn, const Vec& x) {
  try {
    return fn(x);
  } catch (const expr::EvalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

ConcavityVerdict sample_concavity(ConcavityKind kind, const ScalarFn& fn, const Vec& grad,
                                  const Vec& xbar, const Box& domain, const SampleConfig& cfg,
                                  Rng& rng) {
  const auto d = xbar.size();
  if (domain.lower.size() != d || domain.upper.size() != d ||
      (domain.upper - domain.lower).minCoeff() < 0.0) {
    throw SufficiencyError("empty sampling domain");
  }
  if (!domain.lower.allFinite() || !domain.upper.allFinite()) {
    throw SufficiencyError("sampling domain must be bounded");
  }
  ConcavityVerdict v;
  v.kind = kind;
  const auto weights = mix_weights(cfg.mix);
  std::vector<Vec> ys;
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec lo = xbar, hi = xbar;
    lo(i) = domain.lower(i);
    hi(i) = domain.upper(i);
    ys.push_back(lo);
    ys.push_back(hi);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t s = 0; s < cfg.directions; ++s) {
    Vec y(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      y(i) = domain.lower(i) + unit(rng) * (domain.upper(i) - domain.lower(i));
    }
    ys.push_back(std::move(y));
  }
  const double fx = fn(xbar);
  auto record = [&](const Vec& y, double t, double viol) {
    if (std::isnan(viol)) return;
    if (viol > v.max_violation) v.max_violation = viol;
    if (viol > cfg.conc_tol && (!v.counterexample || viol > v.counterexample->violation)) {
      v.counterexample = Counterexample{y, t, viol, std::nullopt};
    }
  };
  for (const auto& y : ys) {
    if ((y - xbar).norm() == 0.0) continue;
    ++v.samples_used;
    const double fy = safe_eval(fn, y);
    switch (kind) {
      case ConcavityKind::Concave:
        for (double t : weights) {
          record(y, t, (1.0 - t) * fx + t * fy - safe_eval(fn, Vec((1.0 - t) * xbar + t * y)));
        }
        break;
      case ConcavityKind::PseudoConcave:
        if (grad.dot(y - xbar) <= 0.0) record(y, 1.0, fy - fx);
        break;
      case ConcavityKind::QuasiConcave:
        if (fx <= fy) {
          for (double t : weights) record(y, t, fx - safe_eval(fn, Vec((1.0 - t) * xbar + t * y)));
        }
        break;
    }
  }
  v.holds_on_samples = !v.counterexample.has_value();
  return v;
}

SampleConfig with_stream(SampleConfig cfg, std::uint64_t stream) {
  cfg.seed = splitmix64(cfg.seed ^ splitmix64(stream));
  return cfg;
}

std::string rule_name(const BolzaProblem& prob, int which) {
  return (prob.is_mayer() ? "Shm" : "Shb") + std::to_string(which);
}

bool interior(const ControlSet& U, const Vec& u) {
  if (U.kind() == ControlSet::Kind::Free) return true;
  if (U.kind() == ControlSet::Kind::Finite) return false;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!(u(i) > U.lower()(i) && u(i) < U.upper()(i))) return false;
  }
  return true;
}

std::vector<GridPoint> hamiltonian_grid(const Process& cand, const MultiplierSet& mult,
                                        double T, std::size_t points) {
  const auto corners = union_corners(T, process_corners(cand), mult.adjoint.corners());
  return evaluation_grid(T, corners, points);
}

// Per-grid-point concavity verdicts folded into one check.
void fold(HamiltonianCheck& out, const std::vector<GridPoint>& grid,
          const std::vector<ConcavityVerdict>& verdicts, double tol) {
  out.tol = tol;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& v = verdicts[i];
    out.samples_used += v.samples_used;
    if (v.max_violation > out.residual || !out.argmax_t) {
      if (v.max_violation >= out.residual) {
        out.residual = v.max_violation;
        out.argmax_t = grid[i].t;
      }
    }
    if (v.counterexample && (!out.counterexample || v.counterexample->violation > out.counterexample->violation)) {
      out.counterexample = v.counterexample;
      out.counterexample->time = grid[i].t;
    }
  }
  out.holds = !out.counterexample.has_value();
}

}  // namespace

std::string to_string(ConcavityKind k) {
  switch (k) {
    case ConcavityKind::Concave: return "concave_at";
    case ConcavityKind::PseudoConcave: return "pseudo_concave_at";
    case ConcavityKind::QuasiConcave: return "quasi_concave_at";
  }
  return "";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Auto: return "auto";
    case Strategy::Shb1: return "shb1";
    case Strategy::Shb2: return "shb2";
    case Strategy::Shb3: return "shb3";
  }
  return "";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pareto: return "pareto";
    case Verdict::WeakPareto: return "weak_pareto";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "";
}

std::vector<double> mix_weights(std::size_t count) {
  std::vector<double> w(count);
  for (std::size_t j = 0; j < count; ++j) {
    w[j] = (2.0 * static_cast<double>(j) + 1.0) / (2.0 * static_cast<double>(count));
  }
  return w;
}

Box sample_box(const std::optional<Box>& domain, const Vec& center, double radius) {
  Box b{center.array() - radius, center.array() + radius};
  if (domain) {
    b.lower = b.lower.cwiseMax(domain->lower);
    b.upper = b.upper.cwiseMin(domain->upper);
  }
  return b;
}

double concavity_violation(ConcavityKind kind, const ScalarFn& fn, const Vec& grad,
                           const Vec& xbar, const Vec& y, double t) {
  const double fx = fn(xbar), fy = fn(y);
  const Vec mix = (1.0 - t) * xbar + t * y;
  switch (kind) {
    case ConcavityKind::Concave:
      return (1.0 - t) * fx + t * fy - fn(mix);
    case ConcavityKind::PseudoConcave:
      return grad.dot(y - xbar) <= 0.0 ? fy - fx : -kInf;
    case ConcavityKind::QuasiConcave:
      return fx <= fy ? fx - fn(mix) : -kInf;
  }
  return -kInf;
}

ConcavityVerdict test_concave_at(const ScalarFn& fn, const Vec& xbar, const Box& domain,
                                 const SampleConfig& cfg) {
  Rng rng = make_rng(cfg.seed);
  return sample_concavity(ConcavityKind::Concave, fn, Vec(), xbar, domain, cfg, rng);
}

ConcavityVerdict test_pseudo_concave_at(const ScalarFn& fn, const Vec& grad, const Vec& xbar,
                                        const Box& domain, const SampleConfig& cfg) {
  if (grad.size() != xbar.size() || !grad.allFinite()) {
    throw SufficiencyError("pseudo-concavity needs a finite gradient at the point");
  }
  Rng rng = make_rng(cfg.seed);
  return sample_concavity(ConcavityKind::PseudoConcave, fn, grad, xbar, domain, cfg, rng);
}

ConcavityVerdict test_quasi_concave_at(const ScalarFn& fn, const Vec& xbar, const Box& domain,
                                       const SampleConfig& cfg) {
  Rng rng = make_rng(cfg.seed);
  return sample_concavity(ConcavityKind::QuasiConcave, fn, Vec(), xbar, domain, cfg, rng);
}

double hamiltonian_sup(const BolzaProblem& prob, double t, const Vec& xi, const Vec& p,
                       const Vec& theta, const Vec& start, const SufficiencyConfig& cfg) {
  auto H = [&](const Vec& z) {
    try {
      return hamiltonian_bolza(prob, t, xi, z, p, theta);
    } catch (const expr::EvalError&) {
      return -kInf;
    }
  };
  const auto r = detail::argmax_over(H, prob.control, start, cfg.hstar_grid, cfg.check.mp_refine_tol,
                                     cfg.check.free_radius);
  if (r.unbounded) {
    throw UnboundedHamiltonian("sup of the Hamiltonian over the free control set is unbounded at t = " +
                               std::to_string(t));
  }
  return r.best.value;
}

std::vector<Process> comparison_processes(const BolzaProblem& prob, const Process& cand,
                                          const SufficiencyConfig& cfg, std::size_t* discarded) {
  Rng rng = make_rng(cfg.sample.seed, 0x5eed);
  std::normal_distribution<double> normal;
  const auto& U = prob.control;
  Vec scale = Vec::Ones(prob.k);
  if (U.kind() == ControlSet::Kind::Box) {
    scale = 0.5 * (U.upper() - U.lower());
  } else if (U.kind() == ControlSet::Kind::Finite) {
    double spread = 0.0;
    for (const auto& a : U.points()) {
      for (const auto& b : U.points()) spread = std::max(spread, (a - b).norm());
    }
    scale.setConstant(spread);
  }
  const double T = prob.T;
  const std::size_t pieces = std::max<std::size_t>(cfg.perturbation_pieces, 1);
  std::vector<double> bounds;
  for (std::size_t i = 1; i < pieces; ++i) bounds.push_back(T * static_cast<double>(i) / static_cast<double>(pieces));
  const auto corners = union_corners(T, cand.control.corners(), bounds);
  std::vector<Process> out;
  std::size_t dropped = 0;
  for (std::size_t c = 0; c < cfg.comparisons; ++c) {
    std::vector<Vec> offsets(pieces);
    for (auto& o : offsets) o = Vec::NullaryExpr(prob.k, [&] { return normal(rng); }).cwiseProduct(scale);
    std::vector<SegmentPtr> segs;
    for (std::size_t s = 0; s <= corners.size(); ++s) {
      const double a = s == 0 ? 0.0 : corners[s - 1];
      const double b = s == corners.size() ? T : corners[s];
      const double mid = 0.5 * (a + b);
      const auto idx = cand.control.locate(mid);
      const auto piece = std::min(pieces - 1, static_cast<std::size_t>(mid / T * static_cast<double>(pieces)));
      const Vec off = offsets[piece];
      NormalizedPath base = cand.control;
      segs.push_back(std::make_shared<FunctionSegment>(
          static_cast<std::size_t>(prob.k),
          [base, idx, off, &U](double t) { return U.project(Vec(base.value_in(idx, t) + off)); }));
    }
    try {
      NormalizedPath control(T, corners, std::move(segs));
      Process proc{integrate_state(prob, control, prob.xi0, cfg.state_steps), control};
      if (check_admissible(prob, proc).admissible) {
        out.push_back(std::move(proc));
      } else {
        ++dropped;
      }
    } catch (const std::exception&) {
      ++dropped;
    }
  }
  if (discarded) *discarded = dropped;
  return out;
}

HamiltonianCheck check_Shb1(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const std::vector<Process>& comparisons,
                            const SufficiencyConfig& cfg) {
  HamiltonianCheck out;
  out.rule = rule_name(prob, 1);
  out.tol = cfg.shb1_tol;
  out.comparisons = comparisons.size();
  const auto& P = mult.adjoint;
  for (const auto& other : comparisons) {
    auto corners = union_corners(prob.T, process_corners(cand), process_corners(other));
    corners = union_corners(prob.T, corners, P.corners());
    for (const auto& gp : evaluation_grid(prob.T, corners, cfg.check.grid_points)) {
      if (gp.at_corner) continue;
      const Vec xb = cand.state.value(gp.t), ub = cand.control.value(gp.t);
      const Vec x = other.state.value(gp.t), u = other.control.value(gp.t);
      const Vec p = P.value(gp.t);
      const double dH = hamiltonian_bolza(prob, gp.t, xb, ub, p, mult.theta) -
                        hamiltonian_bolza(prob, gp.t, x, u, p, mult.theta);
      const double r = std::max(0.0, P.derivative(gp.t).dot(x - xb) - dH);
      ++out.samples_used;
      if (r > out.residual || !out.argmax_t) {
        out.residual = std::max(out.residual, r);
        out.argmax_t = gp.t;
      }
    }
  }
  out.holds = out.residual <= out.tol && !comparisons.empty();
  if (comparisons.empty()) out.note = "no admissible comparison process";
  return out;
}

HamiltonianCheck check_Shb2(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const SufficiencyConfig& cfg) {
  HamiltonianCheck out;
  out.rule = rule_name(prob, 2);
  const auto grid = hamiltonian_grid(cand, mult, prob.T, cfg.grid_points);
  auto verdicts = parallel_map<ConcavityVerdict>(grid.size(), cfg.jobs, [&](std::size_t i) {
    const auto& gp = grid[i];
    const Vec xb = cand.state.value(gp.t, gp.side), ub = cand.control.value(gp.t, gp.side);
    const Vec p = mult.adjoint.value(gp.t, gp.side);
    ScalarFn hstar = [&](const Vec& xi) {
      return hamiltonian_sup(prob, gp.t, xi, p, mult.theta, ub, cfg);
    };
    Rng rng = make_rng(cfg.sample.seed, 2000 + i);
    return sample_concavity(ConcavityKind::Concave, hstar, Vec(), xb,
                            sample_box(prob.domain, xb, cfg.sample.radius), cfg.sample, rng);
  });
  fold(out, grid, verdicts, cfg.sample.conc_tol);
  return out;
}

HamiltonianCheck check_Shb3(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const SufficiencyConfig& cfg) {
  HamiltonianCheck out;
  out.rule = rule_name(prob, 3);
  const auto& U = prob.control;
  if (U.kind() == ControlSet::Kind::Finite) {
    throw PreconditionFailed(out.rule + " needs U to be a neighborhood of the control; U is finite");
  }
  const auto grid = hamiltonian_grid(cand, mult, prob.T, cfg.grid_points);
  for (const auto& gp : grid) {
    if (!interior(U, cand.control.value(gp.t, gp.side))) {
      throw PreconditionFailed(out.rule + " needs the control in the interior of U; it is on the "
                               "boundary at t = " + std::to_string(gp.t));
    }
  }
  const int n = prob.n, k = prob.k;
  auto verdicts = parallel_map<ConcavityVerdict>(grid.size(), cfg.jobs, [&](std::size_t i) {
    const auto& gp = grid[i];
    const Vec xb = cand.state.value(gp.t, gp.side), ub = cand.control.value(gp.t, gp.side);
    const Vec p = mult.adjoint.value(gp.t, gp.side);
    ScalarFn H = [&](const Vec& z) {
      return hamiltonian_bolza(prob, gp.t, z.head(n), z.tail(k), p, mult.theta);
    };
    Box sb = sample_box(prob.domain, xb, cfg.sample.radius);
    Box cb = sample_box(std::nullopt, ub, cfg.sample.radius);
    if (U.kind() == ControlSet::Kind::Box) cb = sample_box(Box{U.lower(), U.upper()}, ub, cfg.sample.radius);
    Box joint{Vec(n + k), Vec(n + k)};
    joint.lower << sb.lower, cb.lower;
    joint.upper << sb.upper, cb.upper;
    Vec zb(n + k);
    zb << xb, ub;
    Rng rng = make_rng(cfg.sample.seed, 3000 + i);
    return sample_concavity(ConcavityKind::Concave, H, Vec(), zb, joint, cfg.sample, rng);
  });
  fold(out, grid, verdicts, cfg.sample.conc_tol);
  return out;
}

SufficiencyReport certify(const BolzaProblem& prob, const Process& cand, const MultiplierSet& mult,
                          Strategy strategy, const SufficiencyConfig& cfg) {
  SufficiencyReport rep;
  rep.multipliers = mult;
  rep.conditions = check_conditions(prob, cand, mult, cfg.check);
  const auto& c = rep.conditions;
  if (!(c.nn.pass && c.si.pass && c.sl.pass && c.tc.pass)) {
    std::string failed;
    for (const auto& name : c.failed()) failed += " " + name;
    throw SufficiencyError("multipliers fail the terminal conditions:" + failed);
  }
  const bool full = c.all_pass();

  const double T = prob.T;
  const Vec xT = cand.state.value(T);
  const Box dom = sample_box(prob.domain, xT, cfg.sample.radius);
  const bool mayer = prob.is_mayer();
  std::uint64_t stream = 0;
  for (int i = 0; i < prob.l(); ++i) {
    const auto& g = prob.g0[static_cast<std::size_t>(i)];
    ScalarFn fn = [&g](const Vec& x) { return g.value(x); };
    const auto sc = with_stream(cfg.sample, stream++);
    if (mayer) {
      rep.terminal.push_back({"St1-bis:g0_" + std::to_string(i + 1),
                              test_pseudo_concave_at(fn, g.grad_x(xT), xT, dom, sc)});
    } else {
      rep.terminal.push_back({"St1:g0_" + std::to_string(i + 1), test_concave_at(fn, xT, dom, sc)});
    }
  }
  for (int a = 0; a < prob.m(); ++a) {
    const auto& g = prob.g[static_cast<std::size_t>(a)];
    ScalarFn fn = [&g](const Vec& x) { return g.value(x); };
    rep.terminal.push_back({"St2:g_" + std::to_string(a + 1),
                            test_quasi_concave_at(fn, xT, dom, with_stream(cfg.sample, stream++))});
  }
  for (int b = 0; b < prob.q(); ++b) {
    const auto& h = prob.h[static_cast<std::size_t>(b)];
    ScalarFn fp = [&h](const Vec& x) { return h.value(x); };
    ScalarFn fm = [&h](const Vec& x) { return -h.value(x); };
    rep.terminal.push_back({"St3:h_" + std::to_string(b + 1),
                            test_quasi_concave_at(fp, xT, dom, with_stream(cfg.sample, stream++))});
    rep.terminal.push_back({"St3:-h_" + std::to_string(b + 1),
                            test_quasi_concave_at(fm, xT, dom, with_stream(cfg.sample, stream++))});
  }

  std::vector<Strategy> order;
  if (strategy == Strategy::Auto) {
    order = {Strategy::Shb3, Strategy::Shb2, Strategy::Shb1};
  } else {
    order = {strategy};
  }
  const bool explicit_rule = strategy != Strategy::Auto;
  for (auto s : order) {
    if (s != Strategy::Shb1 && !full) {
      if (explicit_rule) {
        throw SufficiencyError(rule_name(prob, s == Strategy::Shb2 ? 2 : 3) +
                               " needs every necessary condition to hold");
      }
      continue;
    }
    HamiltonianCheck hc;
    try {
      switch (s) {
        case Strategy::Shb1: {
          std::size_t dropped = 0;
          const auto comps = comparison_processes(prob, cand, cfg, &dropped);
          hc = check_Shb1(prob, cand, mult, comps, cfg);
          hc.discarded = dropped;
          break;
        }
        case Strategy::Shb2:
          hc = check_Shb2(prob, cand, mult, cfg);
          break;
        case Strategy::Shb3:
        case Strategy::Auto:
          hc = check_Shb3(prob, cand, mult, cfg);
          break;
      }
    } catch (const SufficiencyError& e) {
      if (explicit_rule) throw;
      hc.rule = rule_name(prob, s == Strategy::Shb1 ? 1 : s == Strategy::Shb2 ? 2 : 3);
      hc.holds = false;
      hc.note = e.what();
    }
    rep.hamiltonian.push_back(hc);
    if (hc.holds) {
      rep.rule_used = hc.rule;
      break;
    }
  }

  const bool terminal_ok = std::all_of(rep.terminal.begin(), rep.terminal.end(),
                                       [](const TerminalCheck& t) { return t.verdict.holds_on_samples; });
  const double eps = cfg.check.tol.nn;
  const bool all_positive = (mult.theta.array() > eps).all() && mult.theta.size() > 0;
  const bool nonzero = mult.theta.size() > 0 && mult.theta.cwiseAbs().maxCoeff() > eps;
  if (!rep.rule_used.empty() && terminal_ok) {
    rep.verdict = all_positive ? Verdict::Pareto : nonzero ? Verdict::WeakPareto : Verdict::Inconclusive;
  }
  if (!terminal_ok) {
    rep.note = "a terminal concavity check found a counterexample";
  } else if (rep.rule_used.empty()) {
    rep.note = "no Hamiltonian rule held on samples";
  } else if (rep.verdict == Verdict::Inconclusive) {
    rep.note = "theta vanishes";
  }
  return rep;
}

}  // namespace mocp
