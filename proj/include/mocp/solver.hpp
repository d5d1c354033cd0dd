#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mocp/multipliers.hpp"
#include "mocp/pontryagin.hpp"
#include "mocp/problem.hpp"
#include "mocp/sufficiency.hpp"

namespace mocp {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FbsmConfig {
  std::size_t max_iters = 1000;
  double relaxation = 0.5;
  double min_relaxation = 1.0 / 64.0;
  std::size_t steps = 400;        // uniform control nodes
  double tol = 1e-10;             // sup-norm change of the control, relative
  /// Weight k of the proximal term -|z - u|^2 / (2k) in the control update;
  /// 0 disables it. Not used for finite control sets.
  double proximal = 10.0;
  /// Sweeps between checks of the necessary conditions, which also end the loop.
  std::size_t check_every = 25;
  std::size_t argmax_grid = 21;   // per control dimension
};

struct AugLagConfig {
  double rho0 = 1.0;
  double growth = 10.0;
  double rho_max = 1e4;
  std::size_t max_outer = 8;
  double feas_tol = 1e-8;
};

struct SolverConfig {
  FbsmConfig fbsm;
  AugLagConfig al;
  CheckConfig check = solver_check();
  bool certify = false;
  SufficiencyConfig sufficiency;
  double dom_tol = 1e-9;
  unsigned jobs = 1;

  static CheckConfig solver_check() {
    CheckConfig c;
    c.tol.ae = 1e-3;
    c.tol.mp = 1e-4;
    return c;
  }
};

struct ParetoPoint {
  Vec weight;
  Process process{PiecewiseC1Path::constant(1.0, Vec::Zero(1)),
                  NormalizedPath::constant(1.0, Vec::Zero(1))};
  Vec objectives;
  MultiplierSet multipliers{Vec(), Vec(), Vec(), PiecewiseC1Path::constant(1.0, Vec::Zero(1))};  // unit norm
  ConditionReport necessary;
  std::optional<SufficiencyReport> sufficiency;
  bool dominated = false;
  bool weakly_dominated = false;
  bool failed = false;
  std::string failure;
  std::size_t iterations = 0;
  std::size_t outer_iterations = 0;
  double relaxation = 0.0;  // final value after any halving
  /// Scalarized (augmented) objective after each accepted sweep.
  std::vector<double> history;
};

/// Validates theta as a point of the simplex (1e-12).
void check_weight(const Vec& theta, int l);

/// Forward-backward sweep for max sum theta_i J_i with an augmented Lagrangian
/// outer loop for the terminal constraints. Failures are flagged on the point;
/// an invalid weight or an unbounded pointwise maximization throws.
ParetoPoint solve_scalarized(const BolzaProblem& prob, const Vec& theta,
                             const SolverConfig& cfg = {});

struct DominanceFlags {
  std::vector<bool> dominated;
  std::vector<bool> weakly_dominated;
};
DominanceFlags dominance_filter(const std::vector<Vec>& objectives, double dom_tol = 1e-9);

/// Uniform simplex lattice with `divisions` steps per axis, lexicographic
/// order; divisions shrink until the lattice has at most `cap` points.
std::vector<Vec> weight_grid(int l, int divisions = 10, std::size_t cap = 500);

struct ParetoFront {
  std::vector<ParetoPoint> points;  // successful solves, ordered by weight
  std::vector<Vec> failed_weights;
  std::vector<std::string> failures;
};

ParetoFront sweep_front(const BolzaProblem& prob, const std::vector<Vec>& weights,
                        const SolverConfig& cfg = {});

}  // namespace mocp
