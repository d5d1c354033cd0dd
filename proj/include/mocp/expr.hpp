#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mocp::expr {

struct ParseError : std::runtime_error {
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset;
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Op {
  Const,
  Time,
  State,    // x[i]
  Control,  // u[j]
  Param,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Sign,
  Min,
  Max,
  IfLess,  // a < b ? c : d
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // Const, Param
  int index = 0;       // State, Control
  std::string name;    // Param
  std::vector<NodePtr> args;
};

/// A differentiation variable.
struct Var {
  enum class Kind { Time, State, Control } kind;
  int index = 0;
  static Var t() { return {Kind::Time, 0}; }
  static Var x(int i) { return {Kind::State, i}; }
  static Var u(int j) { return {Kind::Control, j}; }
};

/// Point at which an expression is evaluated.
struct EvalPoint {
  double t = 0.0;
  std::span<const double> x;
  std::span<const double> u;
};

struct Derivative;

/// Immutable expression tree over t, x[i], u[j] and named parameters.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr constant(double v);
  static Expr time();
  static Expr state(int i);
  static Expr control(int j);
  static Expr param(std::string name, double value);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);

  const Node& node() const { return *root_; }
  const NodePtr& ptr() const { return root_; }
  bool valid() const { return static_cast<bool>(root_); }

  double eval(const EvalPoint& at) const;
  Derivative differentiate(Var wrt) const;
  bool depends_on(Var v) const;
  /// True if an abs/min/max/sign node has `v` in one of its arguments.
  bool nonsmooth_in(Var v) const;
  bool is_zero() const;
  /// Highest x index used plus one (0 when none), same for u.
  int state_extent() const;
  int control_extent() const;
  bool uses_time() const;
  /// Rename x[i] to x[i + offset].
  Expr shift_state(int offset) const;
  std::string to_string() const;

 private:
  NodePtr root_;
};

struct Derivative {
  Expr expr;
  bool nonsmooth = false;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// What identifiers a parsed expression may use.
struct Signature {
  int n = 0;                 // state dimension
  int k = 0;                 // control dimension
  bool allow_time = true;
  bool allow_control = true;
  std::map<std::string, double> params;

  static Signature running(int n, int k, std::map<std::string, double> params = {});
  static Signature terminal(int n, std::map<std::string, double> params = {});
};

/// Precedence: ^ (right-assoc) > unary minus > * / > + -.
Expr parse(std::string_view source, const Signature& sig);

/// Flat stack program for fast repeated evaluation. Reentrant.
class Compiled {
 public:
  Compiled() = default;
  explicit Compiled(const Expr& e);
  double eval(const EvalPoint& at) const;

 private:
  struct Instr {
    Op op;
    double value;
    int index;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
};

}  // namespace mocp::expr
