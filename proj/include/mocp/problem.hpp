#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mocp/expr.hpp"
#include "mocp/trajectory.hpp"

namespace mocp {

struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Box {
  Vec lower;
  Vec upper;
  bool contains(const Vec& x, double tol = 0.0) const;
};

class ControlSet {
 public:
  enum class Kind { Box, Finite, Free };

  static ControlSet box(Vec lower, Vec upper);
  static ControlSet finite(std::vector<Vec> points);
  static ControlSet free(int k);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const std::vector<Vec>& points() const { return points_; }

  bool contains(const Vec& u, double tol = 1e-9) const;
  /// Nearest point of the set (clamp, nearest element, identity).
  Vec project(const Vec& u) const;
  std::string kind_name() const;

 private:
  Kind kind_ = Kind::Free;
  int dim_ = 0;
  Vec lower_, upper_;
  std::vector<Vec> points_;
};

/// Scalar expression with compiled value and gradients. Running fields see
/// (t, x, u); terminal fields see x only.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(expr::Expr e, int n, int k);
  static ScalarField zero(int n, int k);

  double value(double t, const Vec& x, const Vec& u) const;
  double value(const Vec& x) const { return value(0.0, x, Vec()); }
  Vec grad_x(double t, const Vec& x, const Vec& u) const;
  Vec grad_x(const Vec& x) const { return grad_x(0.0, x, Vec()); }
  Vec grad_u(double t, const Vec& x, const Vec& u) const;

  /// True when a gradient falls back to central differences.
  bool nonsmooth_x() const { return nonsmooth_x_; }
  bool nonsmooth_u() const { return nonsmooth_u_; }
  bool is_zero() const { return expr_.is_zero(); }
  bool depends_on_control() const;
  const expr::Expr& expr() const { return expr_; }
  std::string to_string() const { return expr_.to_string(); }

 private:
  double fd(int which, int index, double t, const Vec& x, const Vec& u) const;

  expr::Expr expr_;
  int n_ = 0, k_ = 0;
  expr::Compiled value_;
  std::vector<expr::Compiled> dx_, du_;
  bool nonsmooth_x_ = false, nonsmooth_u_ = false;
};

struct PartialDifferentials {
  Mat D2f;   // n x n
  Mat D2f0;  // l x n
  Mat D3f;   // n x k
  Mat D3f0;  // l x k
  bool finite_differences = false;
};

struct TerminalDifferentials {
  Mat Dg0;  // l x n
  Mat Dg;   // m x n
  Mat Dh;   // q x n
};

/// Multiobjective Bolza problem on [0, T]. Mayer when every running term is zero.
struct BolzaProblem {
  std::string name;
  double T = 1.0;
  int n = 0;
  int k = 0;
  std::optional<Box> domain;
  ControlSet control;
  Vec xi0;
  std::vector<ScalarField> f;   // n
  std::vector<ScalarField> f0;  // l running objectives
  std::vector<ScalarField> g0;  // l terminal objectives
  std::vector<ScalarField> g;   // m inequalities g >= 0
  std::vector<ScalarField> h;   // q equalities h = 0
  std::map<std::string, double> params;
  /// Source strings, kept for serialization.
  struct Sources {
    std::vector<std::string> f, f0, g0, g, h;
  } sources;

  int l() const { return static_cast<int>(g0.size()); }
  int m() const { return static_cast<int>(g.size()); }
  int q() const { return static_cast<int>(h.size()); }
  bool is_mayer() const;
  void validate() const;

  Vec dynamics(double t, const Vec& x, const Vec& u) const;
  Vec running(double t, const Vec& x, const Vec& u) const;
  Vec terminal_objectives(const Vec& x) const;
  Vec inequalities(const Vec& x) const;
  Vec equalities(const Vec& x) const;
};

/// Build a problem from expression strings; parse errors propagate.
struct ProblemSpec {
  std::string name;
  double T = 1.0;
  int n = 1;
  int k = 1;
  std::optional<Box> domain;
  ControlSet control = ControlSet::free(1);
  Vec xi0;
  std::vector<std::string> f, f0, g0, g, h;
  std::map<std::string, double> params;
};
BolzaProblem build_problem(const ProblemSpec& spec);
ProblemSpec to_spec(const BolzaProblem& prob);

struct Process {
  PiecewiseC1Path state;
  NormalizedPath control;
};

struct AdmissibilityTolerances {
  double dynamics = 1e-5;
  double ineq = 1e-8;
  double eq = 1e-8;
  double initial = 1e-8;
  double control = 1e-9;
  std::size_t grid_points = 2001;
};

struct AdmissibilityReport {
  double dynamics_residual = 0.0;
  double dynamics_argmax_t = 0.0;
  double initial_residual = 0.0;
  std::vector<std::pair<int, double>> ineq_violations;
  std::vector<std::pair<int, double>> eq_residuals;
  bool in_domain = true;
  bool control_in_set = true;
  bool admissible = true;
  AdmissibilityTolerances tol;
};

/// Corner union of state and control: the pieces on which the process is smooth.
std::vector<double> process_corners(const Process& proc);

/// Path of fn(t, x(t), u(t)) on the pieces of the process.
NormalizedPath along(const Process& proc, std::size_t dim,
                     std::function<Vec(double, const Vec&, const Vec&)> fn);

Vec evaluate_objectives(const BolzaProblem& prob, const Process& proc,
                        double quad_tol = kDefaultQuadTol);
AdmissibilityReport check_admissible(const BolzaProblem& prob, const Process& proc,
                                     const AdmissibilityTolerances& tol = {});
PartialDifferentials partial_differentials(const BolzaProblem& prob, double t, const Vec& x,
                                           const Vec& u, bool with_control = true);
TerminalDifferentials terminal_differentials(const BolzaProblem& prob, const Vec& xT);

/// Forward RK4 under `control` from xi0 with at least `steps` steps, aligned to
/// control corners and control breakpoints. Output is the quintic dense
/// output of the integrator.
PiecewiseC1Path integrate_state(const BolzaProblem& prob, const NormalizedPath& control,
                                const Vec& xi0, std::size_t steps = 1000);
Process simulate(const BolzaProblem& prob, const NormalizedPath& control,
                 std::size_t steps = 1000);

}  // namespace mocp
