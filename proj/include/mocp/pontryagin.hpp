#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mocp/multipliers.hpp"
#include "mocp/problem.hpp"

namespace mocp {

struct ConditionTolerances {
  double nn = 1e-9;
  double si = 1e-9;
  double sl = 1e-7;
  double tc = 1e-6;
  double ae = 1e-4;
  double mp = 1e-5;
  double ch = 1e-6;
};

enum class HamiltonianForm { Bolza, Mayer };

struct CheckConfig {
  ConditionTolerances tol;
  std::size_t grid_points = 1001;
  std::size_t box_grid = 101;       // per control dimension
  std::size_t free_grid = 41;       // per dimension of the local free-control grid
  double free_radius = 1.0;
  double mp_refine_tol = 1e-6;      // golden-section stopping width
  HamiltonianForm form = HamiltonianForm::Bolza;
  unsigned jobs = 1;
};

struct ConditionResult {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = true;
  std::optional<double> argmax_t;
  std::optional<Vec> argmax_control;
};

struct ConditionReport {
  ConditionResult nn, si, sl, tc, ae, mp, ch;
  bool all_pass() const;
  std::vector<const ConditionResult*> results() const;
  std::vector<std::string> failed() const;
};

double hamiltonian_mayer(const BolzaProblem& prob, double t, const Vec& x, const Vec& u,
                         const Vec& p);
double hamiltonian_bolza(const BolzaProblem& prob, double t, const Vec& x, const Vec& u,
                         const Vec& p, const Vec& theta);

inline constexpr double kDefaultAdjointStep = 1e-3;

/// Backward RK4 for dp = -(sum theta_i D2 f0_i) - D2 f^T p from p(T) = pT.
/// Steps never cross a corner or breakpoint of the process.
PiecewiseC1Path integrate_adjoint(const BolzaProblem& prob, const Process& proc, const Vec& pT,
                                  const Vec& theta, double step = kDefaultAdjointStep);

/// Right-hand side p(T) of the transversality condition.
Vec transversality_value(const BolzaProblem& prob, const Vec& xT, const Vec& theta,
                         const Vec& lambda, const Vec& mu);

ConditionReport check_conditions(const BolzaProblem& prob, const Process& proc,
                                 const MultiplierSet& mult, const CheckConfig& cfg = {});

struct Gauge {
  enum class Kind { UnitNorm, ThetaOne } kind = Kind::UnitNorm;
  int j = 0;  // zero-based objective index for ThetaOne
  static Gauge unit() { return {}; }
  static Gauge theta_one(int j) { return {Kind::ThetaOne, j}; }
};

struct RecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// The requested theta_j = 1 gauge cannot be met because theta_j vanishes.
struct GaugeInfeasible : RecoveryError {
  using RecoveryError::RecoveryError;
};

struct RecoveryConfig {
  CheckConfig check;
  std::size_t points = 400;      // stationarity sample times
  std::size_t starts = 16;       // random sphere starts for the unit gauge
  std::size_t iterations = 20000;
  double adjoint_step = kDefaultAdjointStep;
  std::uint64_t seed = 0;
};

struct RecoveryResult {
  MultiplierSet multipliers;
  ConditionReport report;
  double objective = 0.0;  // weighted squared residual at the solution
};

/// Solves for (theta, lambda, mu) minimizing the residual of the stationarity,
/// sign and complementary slackness conditions with p(T) tied to the
/// transversality condition, then integrates p and checks everything.
RecoveryResult recover_multipliers(const BolzaProblem& prob, const Process& proc,
                                   const Gauge& gauge, const RecoveryConfig& cfg = {});

}  // namespace mocp
