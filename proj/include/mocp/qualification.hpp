#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mocp/problem.hpp"

namespace mocp {

struct QualificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CQConfig {
  double cq_tol = 1e-8;    // relative
  double act_tol = 1e-7;   // an inequality is active when g(xT) <= act_tol
  std::size_t starts = 32;
  std::size_t iterations = 4000;
  std::size_t grid_points = 1001;
  std::uint64_t seed = 0;
};

/// Labelled rows; the first `sign_rows` carry nonnegative coefficients.
struct GradientStack {
  std::vector<std::string> labels;
  Mat rows;
  int sign_rows = 0;
};

struct CQReport {
  std::string which;
  bool holds = true;
  /// Minimum of |sum w_r row_r| over unit w (positive independence) or the
  /// smallest singular value (linear independence).
  double measure = 0.0;
  double threshold = 0.0;
  std::vector<std::string> labels;
  /// Violating coefficients when the condition fails (unit norm).
  std::optional<Vec> certificate;
  /// |sum certificate_r row_r|, re-evaluated.
  std::optional<double> certificate_residual;
  std::optional<double> witness_t;
  std::string note;
};

/// Only the zero combination with c >= 0 on the sign block vanishes.
CQReport positive_independence(const GradientStack& stack, const CQConfig& cfg = {});
CQReport linear_independence(const GradientStack& stack, const CQConfig& cfg = {});

GradientStack qc_stack(const BolzaProblem& prob, const Vec& xT, bool with_objectives,
                       double act_tol);
CQReport check_QC1(const BolzaProblem& prob, const Vec& xT, const CQConfig& cfg = {});
CQReport check_QC0(const BolzaProblem& prob, const Vec& xT, const CQConfig& cfg = {});

/// Rows composed with the control differential at T; `skip` drops objective j
/// (or none when negative), `bolza` adds the running-objective control partials.
GradientStack control_stack(const BolzaProblem& prob, const Process& proc, bool objectives,
                            int skip, bool bolza);
CQReport check_Alib(const BolzaProblem& prob, const Process& proc, const CQConfig& cfg = {});
CQReport check_Af(const BolzaProblem& prob, const Process& proc, int j, bool bolza,
                  const CQConfig& cfg = {});
CQReport check_Av3(const BolzaProblem& prob, const Process& proc, const CQConfig& cfg = {});

}  // namespace mocp
