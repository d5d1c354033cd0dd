#include "mocp/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace mocp::expr {

ParseError::ParseError(const std::string& what, std::size_t off)
    : std::runtime_error(what + " at byte " + std::to_string(off)), offset(off) {}

namespace {

NodePtr make(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Sign: return "sign";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::IfLess: return "ifless";
    default: return "?";
  }
}

double checked_pow(double a, double b) {
  if (a < 0.0 && b != std::floor(b)) {
    throw EvalError("negative base raised to a non-integer power");
  }
  if (b == 2.0) return a * a;
  if (b == 3.0) return a * a * a;
  return std::pow(a, b);
}

double apply(Op op, double a, double b = 0.0) {
  switch (op) {
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div:
      if (b == 0.0) throw EvalError("division by zero");
      return a / b;
    case Op::Pow: return checked_pow(a, b);
    case Op::Neg: return -a;
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Exp: return std::exp(a);
    case Op::Log:
      if (!(a > 0.0)) throw EvalError("log of a non-positive number");
      return std::log(a);
    case Op::Sqrt:
      if (a < 0.0) throw EvalError("sqrt of a negative number");
      return std::sqrt(a);
    case Op::Abs: return std::abs(a);
    case Op::Sign: return a < 0.0 ? -1.0 : 1.0;
    case Op::Min: return std::min(a, b);
    case Op::Max: return std::max(a, b);
    default: throw EvalError("bad operator");
  }
}

double eval_node(const Node& n, const EvalPoint& at) {
  switch (n.op) {
    case Op::Const:
    case Op::Param:
      return n.value;
    case Op::Time:
      return at.t;
    case Op::State:
      if (static_cast<std::size_t>(n.index) >= at.x.size()) throw EvalError("x index out of range");
      return at.x[static_cast<std::size_t>(n.index)];
    case Op::Control:
      if (static_cast<std::size_t>(n.index) >= at.u.size()) throw EvalError("u index out of range");
      return at.u[static_cast<std::size_t>(n.index)];
    case Op::IfLess:
      return eval_node(*n.args[0], at) < eval_node(*n.args[1], at) ? eval_node(*n.args[2], at)
                                                                    : eval_node(*n.args[3], at);
    default:
      break;
  }
  if (n.args.size() == 1) return apply(n.op, eval_node(*n.args[0], at));
  return apply(n.op, eval_node(*n.args[0], at), eval_node(*n.args[1], at));
}

bool matches(const Node& n, Var v) {
  switch (v.kind) {
    case Var::Kind::Time: return n.op == Op::Time;
    case Var::Kind::State: return n.op == Op::State && n.index == v.index;
    case Var::Kind::Control: return n.op == Op::Control && n.index == v.index;
  }
  return false;
}

bool depends(const Node& n, Var v) {
  if (matches(n, v)) return true;
  for (const auto& a : n.args) {
    if (depends(*a, v)) return true;
  }
  return false;
}

// Light constant folding so derivative trees stay readable.
Expr fold(Op op, Expr a, Expr b) {
  const auto& pa = a.ptr();
  const auto& pb = b.ptr();
  const bool ca = pa->op == Op::Const, cb = pb->op == Op::Const;
  if (ca && cb && op != Op::Div && op != Op::Pow) return Expr::constant(apply(op, pa->value, pb->value));
  switch (op) {
    case Op::Add:
      if (is_const(pa, 0)) return b;
      if (is_const(pb, 0)) return a;
      break;
    case Op::Sub:
      if (is_const(pb, 0)) return a;
      if (is_const(pa, 0)) return Expr::unary(Op::Neg, b);
      break;
    case Op::Mul:
      if (is_const(pa, 0) || is_const(pb, 0)) return Expr::constant(0.0);
      if (is_const(pa, 1)) return b;
      if (is_const(pb, 1)) return a;
      break;
    case Op::Div:
      if (is_const(pa, 0) && !is_const(pb, 0)) return Expr::constant(0.0);
      if (is_const(pb, 1)) return a;
      break;
    case Op::Pow:
      if (is_const(pb, 1)) return a;
      if (is_const(pb, 0)) return Expr::constant(1.0);
      break;
    default:
      break;
  }
  return Expr(make(op, {pa, pb}));
}

Derivative diff(const Expr& e, Var v) {
  const Node& n = e.node();
  if (!depends(n, v)) return {Expr::constant(0.0), false};
  auto arg = [&](std::size_t i) { return Expr(n.args[i]); };
  switch (n.op) {
    case Op::Time:
    case Op::State:
    case Op::Control:
      return {Expr::constant(1.0), false};
    case Op::Add:
    case Op::Sub: {
      auto da = diff(arg(0), v), db = diff(arg(1), v);
      return {fold(n.op, da.expr, db.expr), da.nonsmooth || db.nonsmooth};
    }
    case Op::Mul: {
      auto da = diff(arg(0), v), db = diff(arg(1), v);
      return {fold(Op::Add, fold(Op::Mul, da.expr, arg(1)), fold(Op::Mul, arg(0), db.expr)),
              da.nonsmooth || db.nonsmooth};
    }
    case Op::Div: {
      auto da = diff(arg(0), v), db = diff(arg(1), v);
      // (a' b - a b') / b^2
      auto num = fold(Op::Sub, fold(Op::Mul, da.expr, arg(1)), fold(Op::Mul, arg(0), db.expr));
      return {fold(Op::Div, num, fold(Op::Pow, arg(1), Expr::constant(2.0))),
              da.nonsmooth || db.nonsmooth};
    }
    case Op::Pow: {
      auto da = diff(arg(0), v);
      if (!depends(*n.args[1], v)) {
        // c a^(c-1) a'
        auto c = arg(1);
        auto cm1 = fold(Op::Sub, c, Expr::constant(1.0));
        return {fold(Op::Mul, fold(Op::Mul, c, fold(Op::Pow, arg(0), cm1)), da.expr), da.nonsmooth};
      }
      auto db = diff(arg(1), v);
      // a^b (b' log a + b a' / a)
      auto inner = fold(Op::Add, fold(Op::Mul, db.expr, Expr::unary(Op::Log, arg(0))),
                        fold(Op::Div, fold(Op::Mul, arg(1), da.expr), arg(0)));
      return {fold(Op::Mul, e, inner), da.nonsmooth || db.nonsmooth};
    }
    case Op::Neg: {
      auto da = diff(arg(0), v);
      if (da.expr.is_zero()) return da;
      return {Expr::unary(Op::Neg, da.expr), da.nonsmooth};
    }
    case Op::Sin: {
      auto da = diff(arg(0), v);
      return {fold(Op::Mul, Expr::unary(Op::Cos, arg(0)), da.expr), da.nonsmooth};
    }
    case Op::Cos: {
      auto da = diff(arg(0), v);
      return {fold(Op::Mul, Expr::unary(Op::Neg, Expr::unary(Op::Sin, arg(0))), da.expr),
              da.nonsmooth};
    }
    case Op::Exp: {
      auto da = diff(arg(0), v);
      return {fold(Op::Mul, e, da.expr), da.nonsmooth};
    }
    case Op::Log: {
      auto da = diff(arg(0), v);
      return {fold(Op::Div, da.expr, arg(0)), da.nonsmooth};
    }
    case Op::Sqrt: {
      auto da = diff(arg(0), v);
      return {fold(Op::Div, da.expr, fold(Op::Mul, Expr::constant(2.0), e)), da.nonsmooth};
    }
    case Op::Abs: {
      // right-branch convention: sign(0) = +1
      auto da = diff(arg(0), v);
      return {fold(Op::Mul, Expr::unary(Op::Sign, arg(0)), da.expr), true};
    }
    case Op::Sign:
      return {Expr::constant(0.0), true};
    case Op::Min:
    case Op::Max: {
      auto da = diff(arg(0), v), db = diff(arg(1), v);
      // min: a < b picks a', max: b < a picks a'; ties pick b'
      auto lhs = n.op == Op::Min ? n.args[0] : n.args[1];
      auto rhs = n.op == Op::Min ? n.args[1] : n.args[0];
      return {Expr(make(Op::IfLess, {lhs, rhs, da.expr.ptr(), db.expr.ptr()})), true};
    }
    case Op::IfLess: {
      auto dc = diff(arg(2), v), dd = diff(arg(3), v);
      return {Expr(make(Op::IfLess, {n.args[0], n.args[1], dc.expr.ptr(), dd.expr.ptr()})), true};
    }
    default:
      return {Expr::constant(0.0), false};
  }
}

bool nonsmooth(const Node& n, Var v) {
  if (n.op == Op::Abs || n.op == Op::Sign || n.op == Op::Min || n.op == Op::Max ||
      n.op == Op::IfLess) {
    if (depends(n, v)) return true;
  }
  for (const auto& a : n.args) {
    if (nonsmooth(*a, v)) return true;
  }
  return false;
}

int extent(const Node& n, Op which) {
  int e = (n.op == which) ? n.index + 1 : 0;
  for (const auto& a : n.args) e = std::max(e, extent(*a, which));
  return e;
}

bool uses(const Node& n, Op which) {
  if (n.op == which) return true;
  for (const auto& a : n.args) {
    if (uses(*a, which)) return true;
  }
  return false;
}

NodePtr shift(const NodePtr& n, int offset) {
  if (n->op == Op::State) {
    auto c = std::make_shared<Node>(*n);
    c->index += offset;
    return c;
  }
  if (n->args.empty()) return n;
  auto c = std::make_shared<Node>(*n);
  for (auto& a : c->args) a = shift(a, offset);
  return c;
}

int precedence(Op op) {
  switch (op) {
    case Op::Add: case Op::Sub: return 1;
    case Op::Mul: case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void print(const Node& n, std::ostream& os) {
  auto child = [&](const NodePtr& c, bool paren) {
    if (paren) os << '(';
    print(*c, os);
    if (paren) os << ')';
  };
  switch (n.op) {
    case Op::Const:
      if (n.value < 0) os << '(' << format_number(n.value) << ')';
      else os << format_number(n.value);
      return;
    case Op::Param: os << n.name; return;
    case Op::Time: os << 't'; return;
    case Op::State: os << "x[" << n.index << ']'; return;
    case Op::Control: os << "u[" << n.index << ']'; return;
    case Op::Neg:
      os << '-';
      child(n.args[0], precedence(n.args[0]->op) <= precedence(Op::Neg));
      return;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
      const int p = precedence(n.op);
      child(n.args[0], precedence(n.args[0]->op) < p);
      os << ' ' << (n.op == Op::Add ? '+' : n.op == Op::Sub ? '-' : n.op == Op::Mul ? '*' : '/')
         << ' ';
      // left-associative: equal precedence on the right needs parentheses
      child(n.args[1], precedence(n.args[1]->op) <= p);
      return;
    }
    case Op::Pow:
      child(n.args[0], precedence(n.args[0]->op) <= precedence(Op::Pow));
      os << '^';
      child(n.args[1], precedence(n.args[1]->op) < precedence(Op::Pow));
      return;
    default:
      break;
  }
  os << function_name(n.op) << '(';
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    if (i) os << ", ";
    print(*n.args[i], os);
  }
  os << ')';
}

// ---------------------------------------------------------------------------
// parser

class Parser {
 public:
  Parser(std::string_view src, const Signature& sig) : src_(src), sig_(sig) {}

  Expr run() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    Expr e = expr();
    skip();
    if (pos_ != src_.size()) throw ParseError("unexpected character", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  Expr expr() {
    Expr lhs = term();
    while (true) {
      if (accept('+')) lhs = Expr::binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = Expr::binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    while (true) {
      if (accept('*')) lhs = Expr::binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = Expr::binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return Expr::unary(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return Expr::binary(Op::Pow, base, unary());
    return base;
  }

  int index_of(const char* what, int limit) {
    expect('[');
    skip();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected integer index", pos_);
    const int idx = std::atoi(std::string(src_.substr(start, pos_ - start)).c_str());
    if (idx >= limit) {
      throw ParseError(std::string(what) + " index " + std::to_string(idx) + " out of range", start);
    }
    expect(']');
    return idx;
  }

  Expr primary() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (accept('(')) {
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    char* end = nullptr;
    const std::string buf(src_.substr(pos_));
    const double v = std::strtod(buf.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - buf.c_str());
    if (used == 0) throw ParseError("malformed number", start);
    pos_ += used;
    return Expr::constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string id(src_.substr(start, pos_ - start));
    skip();
    const bool call = pos_ < src_.size() && src_[pos_] == '(';
    if (!call) {
      if (id == "t") {
        if (!sig_.allow_time) throw ParseError("t is not available here", start);
        return Expr::time();
      }
      if (id == "x" && pos_ < src_.size() && src_[pos_] == '[') {
        return Expr::state(index_of("x", sig_.n));
      }
      if (id == "u" && pos_ < src_.size() && src_[pos_] == '[') {
        if (!sig_.allow_control) throw ParseError("u is not available here", start);
        return Expr::control(index_of("u", sig_.k));
      }
      if (auto it = sig_.params.find(id); it != sig_.params.end()) {
        return Expr::param(id, it->second);
      }
      if (id == "pi") return Expr::constant(3.14159265358979323846);
      throw ParseError("unknown identifier '" + id + "'", start);
    }
    struct Fn {
      const char* name;
      Op op;
      std::size_t arity;
    };
    static constexpr std::array<Fn, 10> kFns = {{{"sin", Op::Sin, 1},
                                                 {"cos", Op::Cos, 1},
                                                 {"exp", Op::Exp, 1},
                                                 {"log", Op::Log, 1},
                                                 {"sqrt", Op::Sqrt, 1},
                                                 {"abs", Op::Abs, 1},
                                                 {"sign", Op::Sign, 1},
                                                 {"min", Op::Min, 2},
                                                 {"max", Op::Max, 2},
                                                 {"ifless", Op::IfLess, 4}}};
    const Fn* fn = nullptr;
    for (const auto& f : kFns) {
      if (id == f.name) fn = &f;
    }
    if (!fn) throw ParseError("unknown function '" + id + "'", start);
    expect('(');
    std::vector<NodePtr> args;
    if (!accept(')')) {
      do {
        args.push_back(expr().ptr());
      } while (accept(','));
      expect(')');
    }
    if (args.size() != fn->arity) {
      throw ParseError(id + " expects " + std::to_string(fn->arity) + " argument(s), got " +
                           std::to_string(args.size()),
                       start);
    }
    return Expr(make(fn->op, std::move(args)));
  }

  std::string_view src_;
  const Signature& sig_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

Expr Expr::constant(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return Expr(n);
}

Expr Expr::time() { return Expr(make(Op::Time, {})); }

Expr Expr::state(int i) {
  auto n = std::make_shared<Node>();
  n->op = Op::State;
  n->index = i;
  return Expr(n);
}

Expr Expr::control(int j) {
  auto n = std::make_shared<Node>();
  n->op = Op::Control;
  n->index = j;
  return Expr(n);
}

Expr Expr::param(std::string name, double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::Param;
  n->name = std::move(name);
  n->value = value;
  return Expr(n);
}

Expr Expr::unary(Op op, Expr a) { return Expr(make(op, {a.ptr()})); }
Expr Expr::binary(Op op, Expr a, Expr b) { return Expr(make(op, {a.ptr(), b.ptr()})); }

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }

double Expr::eval(const EvalPoint& at) const { return eval_node(*root_, at); }
Derivative Expr::differentiate(Var wrt) const { return diff(*this, wrt); }
bool Expr::depends_on(Var v) const { return depends(*root_, v); }
bool Expr::nonsmooth_in(Var v) const { return nonsmooth(*root_, v); }
bool Expr::is_zero() const { return root_->op == Op::Const && root_->value == 0.0; }
int Expr::state_extent() const { return extent(*root_, Op::State); }
int Expr::control_extent() const { return extent(*root_, Op::Control); }
bool Expr::uses_time() const { return uses(*root_, Op::Time); }
Expr Expr::shift_state(int offset) const { return Expr(shift(root_, offset)); }

std::string Expr::to_string() const {
  std::ostringstream os;
  print(*root_, os);
  return os.str();
}

Signature Signature::running(int n, int k, std::map<std::string, double> params) {
  return {n, k, true, true, std::move(params)};
}

Signature Signature::terminal(int n, std::map<std::string, double> params) {
  return {n, 0, false, false, std::move(params)};
}

Expr parse(std::string_view source, const Signature& sig) { return Parser(source, sig).run(); }

// ---------------------------------------------------------------------------
// compiled evaluation

namespace {

void emit(const Node& n, std::vector<std::tuple<Op, double, int>>& out) {
  for (const auto& a : n.args) emit(*a, out);
  out.emplace_back(n.op, n.value, n.index);
}

}  // namespace

Compiled::Compiled(const Expr& e) {
  std::vector<std::tuple<Op, double, int>> prog;
  emit(e.node(), prog);
  std::size_t depth = 0;
  for (const auto& [op, v, idx] : prog) {
    code_.push_back({op == Op::Param ? Op::Const : op, v, idx});
    std::size_t arity = 0;
    switch (op) {
      case Op::Const: case Op::Param: case Op::Time: case Op::State: case Op::Control: arity = 0; break;
      case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: case Op::Pow: case Op::Min:
      case Op::Max: arity = 2; break;
      case Op::IfLess: arity = 4; break;
      default: arity = 1; break;
    }
    depth = depth + 1 - arity;
    max_depth_ = std::max(max_depth_, depth);
  }
}

double Compiled::eval(const EvalPoint& at) const {
  constexpr std::size_t kInline = 64;
  std::array<double, kInline> small{};
  std::vector<double> big;
  double* stack = small.data();
  if (max_depth_ > kInline) {
    big.resize(max_depth_);
    stack = big.data();
  }
  std::size_t sp = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: stack[sp++] = ins.value; break;
      case Op::Time: stack[sp++] = at.t; break;
      case Op::State:
        if (static_cast<std::size_t>(ins.index) >= at.x.size()) throw EvalError("x index out of range");
        stack[sp++] = at.x[static_cast<std::size_t>(ins.index)];
        break;
      case Op::Control:
        if (static_cast<std::size_t>(ins.index) >= at.u.size()) throw EvalError("u index out of range");
        stack[sp++] = at.u[static_cast<std::size_t>(ins.index)];
        break;
      case Op::Add: --sp; stack[sp - 1] += stack[sp]; break;
      case Op::Sub: --sp; stack[sp - 1] -= stack[sp]; break;
      case Op::Mul: --sp; stack[sp - 1] *= stack[sp]; break;
      case Op::Div: case Op::Pow: case Op::Min: case Op::Max:
        --sp;
        stack[sp - 1] = apply(ins.op, stack[sp - 1], stack[sp]);
        break;
      case Op::IfLess:
        sp -= 3;
        stack[sp - 1] = stack[sp - 1] < stack[sp] ? stack[sp + 1] : stack[sp + 2];
        break;
      default:
        stack[sp - 1] = apply(ins.op, stack[sp - 1]);
        break;
    }
  }
  return stack[0];
}

}  // namespace mocp::expr
