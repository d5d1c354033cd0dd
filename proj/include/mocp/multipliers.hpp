#pragma once

#include <cmath>

#include "mocp/trajectory.hpp"

namespace mocp {

/// Multipliers (theta, lambda, mu) and the adjoint path p.
struct MultiplierSet {
  Vec theta;
  Vec lambda;
  Vec mu;
  PiecewiseC1Path adjoint;

  /// Euclidean norm of (theta, lambda, mu).
  double norm() const {
    return std::sqrt(theta.squaredNorm() + lambda.squaredNorm() + mu.squaredNorm());
  }
};

}  // namespace mocp
