#pragma once

#include "mocp/multipliers.hpp"
#include "mocp/problem.hpp"

namespace mocp {

struct TransformError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mayer problem on (sigma, x) with F = (f0_1, ..., f0_l, f), G0_i = sigma_i + g0_i(x),
/// the same terminal constraints, and initial state (0, xi0).
BolzaProblem bolza_to_mayer(const BolzaProblem& prob);

/// Appends sigma_i(t) = integral_0^t f0_i to an admissible process.
Process lift_process(const BolzaProblem& prob, const Process& proc,
                     const AdmissibilityTolerances& tol = {});

/// Drops the first l adjoint components, which must stay constant and equal
/// to theta within tol (relative to 1 + |theta|).
MultiplierSet project_multipliers(const MultiplierSet& augmented, int l, double tol = 1e-6,
                                  std::size_t grid_points = 1001);

/// Single-objective Mayer problem keeping objective i (zero based) and adding
/// g0_k(x) - ref[k] >= 0 for every k != i after the existing inequalities.
BolzaProblem fix_objective_problem(const BolzaProblem& mayer, int i, const Vec& ref);

}  // namespace mocp
