#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mocp/multipliers.hpp"
#include "mocp/pontryagin.hpp"
#include "mocp/problem.hpp"

namespace mocp {

struct SufficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// sup over U of the Hamiltonian is +infinity at some sampled point.
struct UnboundedHamiltonian : SufficiencyError {
  using SufficiencyError::SufficiencyError;
};
/// A rule cannot be applied to this candidate (control set or boundary).
struct PreconditionFailed : SufficiencyError {
  using SufficiencyError::SufficiencyError;
};

enum class ConcavityKind { Concave, PseudoConcave, QuasiConcave };
std::string to_string(ConcavityKind k);

struct Counterexample {
  Vec y;
  double t_mix = 1.0;
  double violation = 0.0;
  std::optional<double> time;  // grid time for Hamiltonian checks
};

/// Falsification test: holds_on_samples only means no sampled violation.
struct ConcavityVerdict {
  ConcavityKind kind = ConcavityKind::Concave;
  bool holds_on_samples = true;
  double max_violation = 0.0;
  std::optional<Counterexample> counterexample;
  std::size_t samples_used = 0;
};

struct SampleConfig {
  std::size_t directions = 256;
  std::size_t mix = 8;  // t = 1/16, 3/16, ..., 15/16
  double radius = 1.0;  // sampling half-width around the point
  double conc_tol = 1e-8;
  std::uint64_t seed = 0;
};

using ScalarFn = std::function<double(const Vec&)>;

/// Mixing weights used by the samplers.
std::vector<double> mix_weights(std::size_t count);
/// Box of half-width `radius` around `center`, clipped to `domain`.
Box sample_box(const std::optional<Box>& domain, const Vec& center, double radius);

/// Violation of the defining inequality at one sample (positive = violated).
double concavity_violation(ConcavityKind kind, const ScalarFn& fn, const Vec& grad,
                           const Vec& xbar, const Vec& y, double t);

ConcavityVerdict test_concave_at(const ScalarFn& fn, const Vec& xbar, const Box& domain,
                                 const SampleConfig& cfg = {});
ConcavityVerdict test_pseudo_concave_at(const ScalarFn& fn, const Vec& grad, const Vec& xbar,
                                        const Box& domain, const SampleConfig& cfg = {});
ConcavityVerdict test_quasi_concave_at(const ScalarFn& fn, const Vec& xbar, const Box& domain,
                                       const SampleConfig& cfg = {});

struct SufficiencyConfig {
  SampleConfig sample;
  std::size_t grid_points = 51;
  double shb1_tol = 1e-6;
  std::size_t comparisons = 20;
  std::size_t perturbation_pieces = 4;
  std::size_t hstar_grid = 41;  // per control dimension
  std::size_t state_steps = 1000;
  CheckConfig check;
  unsigned jobs = 1;
};

struct HamiltonianCheck {
  std::string rule;  // Shb1..3 (Shm1..3 for Mayer problems)
  bool holds = true;
  double residual = 0.0;
  double tol = 0.0;
  std::optional<double> argmax_t;
  std::optional<Counterexample> counterexample;
  std::size_t samples_used = 0;
  std::size_t comparisons = 0;
  std::size_t discarded = 0;
  std::string note;
};

/// Admissible perturbations of the candidate: random piecewise-constant
/// control offsets, projected into U, state re-integrated.
std::vector<Process> comparison_processes(const BolzaProblem& prob, const Process& cand,
                                          const SufficiencyConfig& cfg, std::size_t* discarded = nullptr);

HamiltonianCheck check_Shb1(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const std::vector<Process>& comparisons,
                            const SufficiencyConfig& cfg = {});
HamiltonianCheck check_Shb2(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const SufficiencyConfig& cfg = {});
HamiltonianCheck check_Shb3(const BolzaProblem& prob, const Process& cand,
                            const MultiplierSet& mult, const SufficiencyConfig& cfg = {});

/// sup over U of H_B(t, xi, ., p, theta); throws UnboundedHamiltonian.
double hamiltonian_sup(const BolzaProblem& prob, double t, const Vec& xi, const Vec& p,
                       const Vec& theta, const Vec& start, const SufficiencyConfig& cfg);

enum class Strategy { Auto, Shb1, Shb2, Shb3 };
enum class Verdict { Pareto, WeakPareto, Inconclusive };
std::string to_string(Strategy s);
std::string to_string(Verdict v);

struct TerminalCheck {
  std::string label;  // e.g. "St1:g0_1", "St3:-h_1"
  ConcavityVerdict verdict;
};

struct SufficiencyReport {
  std::string rule_used;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<TerminalCheck> terminal;
  std::vector<HamiltonianCheck> hamiltonian;  // every rule attempted, in order
  MultiplierSet multipliers{Vec(), Vec(), Vec(), PiecewiseC1Path::constant(1.0, Vec::Zero(1))};
  ConditionReport conditions;
  std::string note;
};

SufficiencyReport certify(const BolzaProblem& prob, const Process& cand, const MultiplierSet& mult,
                          Strategy strategy = Strategy::Auto, const SufficiencyConfig& cfg = {});

}  // namespace mocp
