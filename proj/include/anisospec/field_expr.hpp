#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "anisospec/common.hpp"

namespace anisospec {

/// Variable index for the time coordinate; spatial axes are 0-based.
inline constexpr int kTimeVar = -1;

namespace dsl {

enum class Op {
  kConst,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kSin,
  kCos,
  kExp,
  kSqrt,
  kAbs,
  kMin,
  kMax,
  kTanh,
  kLog,
  // Internal ops produced by differentiation; printable and parseable so
  // derivatives round-trip like any other expression.
  kSign,  // sgn(x): -1/0/+1 with sgn(0) = 0
  kStep,  // step(x): 1 if x >= 0 else 0
};

struct Node {
  Op op;
  double value = 0.0;  // kConst
  int var = 0;         // kVar: kTimeVar or spatial axis
  std::shared_ptr<const Node> a, b;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

inline NodePtr make_var(int var) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->var = var;
  return n;
}

inline bool is_const(const NodePtr& n, double v) {
  return n->op == Op::kConst && n->value == v;
}

inline NodePtr make_node(Op op, NodePtr a, NodePtr b = nullptr);

inline double apply_unary(Op op, double x) {
  switch (op) {
    case Op::kNeg:
      return -x;
    case Op::kSin:
      return std::sin(x);
    case Op::kCos:
      return std::cos(x);
    case Op::kExp:
      return std::exp(x);
    case Op::kSqrt:
      return std::sqrt(x);
    case Op::kAbs:
      return std::fabs(x);
    case Op::kTanh:
      return std::tanh(x);
    case Op::kLog:
      return std::log(x);
    case Op::kSign:
      return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case Op::kStep:
      return x >= 0.0 ? 1.0 : 0.0;
    default:
      throw InvalidArgument("apply_unary: not a unary op");
  }
}

inline double apply_binary(Op op, double x, double y) {
  switch (op) {
    case Op::kAdd:
      return x + y;
    case Op::kSub:
      return x - y;
    case Op::kMul:
      return x * y;
    case Op::kDiv:
      return x / y;
    case Op::kPow:
      return std::pow(x, y);
    case Op::kMin:
      return x <= y ? x : y;
    case Op::kMax:
      return x >= y ? x : y;
    default:
      throw InvalidArgument("apply_binary: not a binary op");
  }
}

// Smart constructor with constant folding and the usual algebraic
// identities, so that derivative trees stay small enough to evaluate on
// grids at every time step.
inline NodePtr make_node(Op op, NodePtr a, NodePtr b) {
  const bool ca = a && a->op == Op::kConst;
  const bool cb = b && b->op == Op::kConst;
  if (b == nullptr) {
    if (ca && op != Op::kSqrt && op != Op::kLog) {
      // Fold only finite results; overflow stays a runtime eval error.
      const double v = apply_unary(op, a->value);
      if (std::isfinite(v)) return make_const(v);
    }
    if (op == Op::kNeg && a->op == Op::kNeg) return a->a;
  } else {
    if (ca && cb && op != Op::kDiv && op != Op::kPow) {
      const double v = apply_binary(op, a->value, b->value);
      if (std::isfinite(v)) return make_const(v);
    }
    switch (op) {
      case Op::kAdd:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        break;
      case Op::kSub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return make_node(Op::kNeg, b);
        break;
      case Op::kMul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        if (is_const(a, -1.0)) return make_node(Op::kNeg, b);
        if (is_const(b, -1.0)) return make_node(Op::kNeg, a);
        break;
      case Op::kDiv:
        if (is_const(a, 0.0) && !is_const(b, 0.0)) return make_const(0.0);
        if (is_const(b, 1.0)) return a;
        break;
      case Op::kPow:
        if (is_const(b, 1.0)) return a;
        if (is_const(b, 0.0)) return make_const(1.0);
        break;
      default:
        break;
    }
  }
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

}  // namespace dsl

/// A parsed closed-form scalar field over (x1..xN, t).
///
/// Grammar: numbers; variables x1..xN and t; constant pi; binary + - * / ^;
/// unary -; functions sin, cos, exp, sqrt, abs, min, max, tanh, log.
/// Immutable after construction; evaluation is pure and thread-safe.
class FieldExpr {
 public:
  FieldExpr() : root_(dsl::make_const(0.0)) {}

  static FieldExpr parse(std::string_view text);

  static FieldExpr constant(double v) { return FieldExpr(dsl::make_const(v)); }
  static FieldExpr variable(int var) { return FieldExpr(dsl::make_var(var)); }
  static FieldExpr time() { return variable(kTimeVar); }

  /// Checked single-point evaluation. Throws EvalError on division by zero,
  /// log/sqrt domain errors, or any non-finite intermediate.
  double eval(std::span<const double> x, double t) const {
    return eval_node(*root_, x, t);
  }
  double operator()(std::span<const double> x, double t) const {
    return eval(x, t);
  }

  /// Exact symbolic derivative; var is a spatial axis or kTimeVar.
  /// Conventions: abs'(0) = 0; min/max differentiate by branch with ties
  /// going to the first argument.
  FieldExpr derivative(int var) const {
    return FieldExpr(diff_node(root_, var));
  }

  /// Expression with the time variable replaced by the constant t.
  FieldExpr at_time(double t) const { return FieldExpr(subst_time(root_, t)); }

  bool depends_on_time() const { return depends_on(root_, kTimeVar); }
  bool depends_on_var(int var) const { return depends_on(root_, var); }

  /// Largest spatial axis index referenced, plus one (0 if none).
  int spatial_arity() const { return max_axis(root_) + 1; }

  std::string str() const { return print_node(*root_, 0); }

  const dsl::NodePtr& root() const { return root_; }

  friend FieldExpr operator+(const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(dsl::make_node(dsl::Op::kAdd, a.root_, b.root_));
  }
  friend FieldExpr operator-(const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(dsl::make_node(dsl::Op::kSub, a.root_, b.root_));
  }
  friend FieldExpr operator*(const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(dsl::make_node(dsl::Op::kMul, a.root_, b.root_));
  }
  friend FieldExpr operator/(const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(dsl::make_node(dsl::Op::kDiv, a.root_, b.root_));
  }
  friend FieldExpr operator-(const FieldExpr& a) {
    return FieldExpr(dsl::make_node(dsl::Op::kNeg, a.root_));
  }
  static FieldExpr pow(const FieldExpr& a, const FieldExpr& b) {
    return FieldExpr(dsl::make_node(dsl::Op::kPow, a.root_, b.root_));
  }
  static FieldExpr apply(dsl::Op op, const FieldExpr& a) {
    return FieldExpr(dsl::make_node(op, a.root_));
  }

 private:
  explicit FieldExpr(dsl::NodePtr root) : root_(std::move(root)) {}

  static double eval_node(const dsl::Node& n, std::span<const double> x,
                          double t);
  static dsl::NodePtr diff_node(const dsl::NodePtr& n, int var);
  static dsl::NodePtr subst_time(const dsl::NodePtr& n, double t);
  static bool depends_on(const dsl::NodePtr& n, int var);
  static int max_axis(const dsl::NodePtr& n);
  static std::string print_node(const dsl::Node& n, int parent_prec);

  dsl::NodePtr root_;
};

inline double FieldExpr::eval_node(const dsl::Node& n,
                                   std::span<const double> x, double t) {
  using dsl::Op;
  double r = 0.0;
  switch (n.op) {
    case Op::kConst:
      r = n.value;
      break;
    case Op::kVar:
      if (n.var == kTimeVar) {
        r = t;
        break;
      }
      if (n.var < 0 || static_cast<std::size_t>(n.var) >= x.size())
        throw EvalError("variable x" + std::to_string(n.var + 1) +
                        " out of range for evaluation point");
      r = x[static_cast<std::size_t>(n.var)];
      break;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kPow:
    case Op::kMin:
    case Op::kMax: {
      const double a = eval_node(*n.a, x, t);
      const double b = eval_node(*n.b, x, t);
      if (n.op == Op::kDiv && b == 0.0)
        throw EvalError("division by zero");
      r = dsl::apply_binary(n.op, a, b);
      break;
    }
    default: {
      const double a = eval_node(*n.a, x, t);
      if (n.op == Op::kLog && a <= 0.0)
        throw EvalError("log of non-positive value");
      if (n.op == Op::kSqrt && a < 0.0)
        throw EvalError("sqrt of negative value");
      r = dsl::apply_unary(n.op, a);
      break;
    }
  }
  if (!std::isfinite(r)) throw EvalError("non-finite result in evaluation");
  return r;
}

inline dsl::NodePtr FieldExpr::diff_node(const dsl::NodePtr& n, int var) {
  using dsl::make_const;
  using dsl::make_node;
  using dsl::Op;
  switch (n->op) {
    case Op::kConst:
      return make_const(0.0);
    case Op::kVar:
      return make_const(n->var == var ? 1.0 : 0.0);
    case Op::kAdd:
      return make_node(Op::kAdd, diff_node(n->a, var), diff_node(n->b, var));
    case Op::kSub:
      return make_node(Op::kSub, diff_node(n->a, var), diff_node(n->b, var));
    case Op::kMul:
      return make_node(Op::kAdd,
                       make_node(Op::kMul, diff_node(n->a, var), n->b),
                       make_node(Op::kMul, n->a, diff_node(n->b, var)));
    case Op::kDiv:
      // (a/b)' = (a'b - a b') / b^2
      return make_node(
          Op::kDiv,
          make_node(Op::kSub, make_node(Op::kMul, diff_node(n->a, var), n->b),
                    make_node(Op::kMul, n->a, diff_node(n->b, var))),
          make_node(Op::kMul, n->b, n->b));
    case Op::kPow: {
      if (n->b->op == Op::kConst) {
        // d(a^c) = c a^(c-1) a' ; avoids log of a possibly negative base.
        const double c = n->b->value;
        return make_node(
            Op::kMul, make_const(c),
            make_node(Op::kMul, make_node(Op::kPow, n->a, make_const(c - 1.0)),
                      diff_node(n->a, var)));
      }
      // General rule d(a^b) = a^b (b' log a + b a'/a); requires a > 0.
      auto term1 = make_node(Op::kMul, diff_node(n->b, var),
                             make_node(Op::kLog, n->a));
      auto term2 = make_node(Op::kDiv, make_node(Op::kMul, n->b,
                                                 diff_node(n->a, var)),
                             n->a);
      return make_node(Op::kMul, make_node(Op::kPow, n->a, n->b),
                       make_node(Op::kAdd, term1, term2));
    }
    case Op::kNeg:
      return make_node(Op::kNeg, diff_node(n->a, var));
    case Op::kSin:
      return make_node(Op::kMul, make_node(Op::kCos, n->a),
                       diff_node(n->a, var));
    case Op::kCos:
      return make_node(Op::kNeg, make_node(Op::kMul, make_node(Op::kSin, n->a),
                                           diff_node(n->a, var)));
    case Op::kExp:
      return make_node(Op::kMul, make_node(Op::kExp, n->a),
                       diff_node(n->a, var));
    case Op::kSqrt:
      return make_node(
          Op::kDiv, diff_node(n->a, var),
          make_node(Op::kMul, make_const(2.0), make_node(Op::kSqrt, n->a)));
    case Op::kAbs:
      return make_node(Op::kMul, make_node(Op::kSign, n->a),
                       diff_node(n->a, var));
    case Op::kMin: {
      // step(b-a) = 1 on the branch a <= b, so ties take the first argument.
      auto sel = make_node(Op::kStep, make_node(Op::kSub, n->b, n->a));
      return make_node(
          Op::kAdd, make_node(Op::kMul, sel, diff_node(n->a, var)),
          make_node(Op::kMul,
                    make_node(Op::kSub, make_const(1.0), sel),
                    diff_node(n->b, var)));
    }
    case Op::kMax: {
      auto sel = make_node(Op::kStep, make_node(Op::kSub, n->a, n->b));
      return make_node(
          Op::kAdd, make_node(Op::kMul, sel, diff_node(n->a, var)),
          make_node(Op::kMul,
                    make_node(Op::kSub, make_const(1.0), sel),
                    diff_node(n->b, var)));
    }
    case Op::kTanh: {
      auto th = make_node(Op::kTanh, n->a);
      return make_node(
          Op::kMul,
          make_node(Op::kSub, make_const(1.0), make_node(Op::kMul, th, th)),
          diff_node(n->a, var));
    }
    case Op::kLog:
      return make_node(Op::kDiv, diff_node(n->a, var), n->a);
    case Op::kSign:
    case Op::kStep:
      return make_const(0.0);  // piecewise-constant by convention
  }
  throw InvalidArgument("diff_node: unhandled op");
}

inline dsl::NodePtr FieldExpr::subst_time(const dsl::NodePtr& n, double t) {
  using dsl::Op;
  if (n->op == Op::kConst) return n;
  if (n->op == Op::kVar)
    return n->var == kTimeVar ? dsl::make_const(t) : n;
  auto a = subst_time(n->a, t);
  auto b = n->b ? subst_time(n->b, t) : nullptr;
  if (a == n->a && b == n->b) return n;
  return dsl::make_node(n->op, std::move(a), std::move(b));
}

inline bool FieldExpr::depends_on(const dsl::NodePtr& n, int var) {
  if (n->op == dsl::Op::kVar) return n->var == var;
  if (n->a && depends_on(n->a, var)) return true;
  if (n->b && depends_on(n->b, var)) return true;
  return false;
}

inline int FieldExpr::max_axis(const dsl::NodePtr& n) {
  if (n->op == dsl::Op::kVar) return n->var == kTimeVar ? -1 : n->var;
  int m = -1;
  if (n->a) m = std::max(m, max_axis(n->a));
  if (n->b) m = std::max(m, max_axis(n->b));
  return m;
}

inline std::string FieldExpr::print_node(const dsl::Node& n, int parent_prec) {
  using dsl::Op;
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  auto fn = [&](const char* name) {
    std::string s(name);
    s += "(";
    s += print_node(*n.a, 0);
    if (n.b) {
      s += ", ";
      s += print_node(*n.b, 0);
    }
    s += ")";
    return s;
  };
  std::string s;
  int prec = 5;
  switch (n.op) {
    case Op::kConst:
      s = fmt(n.value);
      // Negative literals need parens inside any operator context.
      if (n.value < 0.0 && parent_prec > 0) s = "(" + s + ")";
      return s;
    case Op::kVar:
      return n.var == kTimeVar ? "t" : "x" + std::to_string(n.var + 1);
    case Op::kAdd:
      prec = 1;
      s = print_node(*n.a, prec) + " + " + print_node(*n.b, prec + 1);
      break;
    case Op::kSub:
      prec = 1;
      s = print_node(*n.a, prec) + " - " + print_node(*n.b, prec + 1);
      break;
    case Op::kMul:
      prec = 2;
      s = print_node(*n.a, prec) + "*" + print_node(*n.b, prec + 1);
      break;
    case Op::kDiv:
      prec = 2;
      s = print_node(*n.a, prec) + "/" + print_node(*n.b, prec + 1);
      break;
    case Op::kNeg:
      prec = 3;
      s = "-" + print_node(*n.a, prec + 1);
      break;
    case Op::kPow:
      prec = 4;
      s = print_node(*n.a, prec + 1) + "^" + print_node(*n.b, prec);
      break;
    case Op::kSin:
      return fn("sin");
    case Op::kCos:
      return fn("cos");
    case Op::kExp:
      return fn("exp");
    case Op::kSqrt:
      return fn("sqrt");
    case Op::kAbs:
      return fn("abs");
    case Op::kMin:
      return fn("min");
    case Op::kMax:
      return fn("max");
    case Op::kTanh:
      return fn("tanh");
    case Op::kLog:
      return fn("log");
    case Op::kSign:
      return fn("sgn");
    case Op::kStep:
      return fn("step");
  }
  if (prec < parent_prec) s = "(" + s + ")";
  return s;
}

namespace dsl {

/// Recursive-descent parser for the expression grammar.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr run() {
    auto e = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = make_node(Op::kAdd, lhs, parse_term());
      else if (eat('-'))
        lhs = make_node(Op::kSub, lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (eat('*'))
        lhs = make_node(Op::kMul, lhs, parse_unary());
      else if (eat('/'))
        lhs = make_node(Op::kDiv, lhs, parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_node(Op::kNeg, parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_atom();
    if (eat('^')) return make_node(Op::kPow, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        ++pos_;
      } else if ((c == 'e' || c == 'E') && pos_ + 1 < text_.size() &&
                 (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                  ((text_[pos_ + 1] == '+' || text_[pos_ + 1] == '-') &&
                   pos_ + 2 < text_.size() &&
                   std::isdigit(
                       static_cast<unsigned char>(text_[pos_ + 2]))))) {
        pos_ += 2;
      } else {
        break;
      }
    }
    const std::string tok(text_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0')
      throw ParseError("malformed number '" + tok + "'", start);
    return make_const(v);
  }

  NodePtr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return make_var(kTimeVar);
    if (name == "pi") return make_const(3.14159265358979323846);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits) {
        const int axis = std::stoi(name.substr(1));
        if (axis < 1) throw ParseError("variable index must be >= 1", start);
        return make_var(axis - 1);
      }
    }
    struct Fn {
      const char* name;
      Op op;
      int arity;
    };
    static constexpr Fn kFns[] = {
        {"sin", Op::kSin, 1},   {"cos", Op::kCos, 1},  {"exp", Op::kExp, 1},
        {"sqrt", Op::kSqrt, 1}, {"abs", Op::kAbs, 1},  {"min", Op::kMin, 2},
        {"max", Op::kMax, 2},   {"tanh", Op::kTanh, 1}, {"log", Op::kLog, 1},
        {"sgn", Op::kSign, 1},  {"step", Op::kStep, 1},
    };
    for (const auto& f : kFns) {
      if (name == f.name) {
        if (!eat('('))
          throw ParseError("expected '(' after function '" + name + "'", pos_);
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (eat(',')) args.push_back(parse_expr());
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        if (static_cast<int>(args.size()) != f.arity)
          throw ParseError("function '" + name + "' expects " +
                               std::to_string(f.arity) + " argument(s), got " +
                               std::to_string(args.size()),
                           start);
        return f.arity == 1 ? make_node(f.op, args[0])
                            : make_node(f.op, args[0], args[1]);
      }
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }
};

}  // namespace dsl

inline FieldExpr FieldExpr::parse(std::string_view text) {
  dsl::Parser p(text);
  return FieldExpr(p.run());
}

/// Compiled flat form of a FieldExpr for fast evaluation over many points.
/// Slots are assigned with stack discipline; buffers are n_points wide.
class FieldTape {
 public:
  explicit FieldTape(const FieldExpr& e) { result_slot_ = compile(e.root()); }

  int slot_count() const { return n_slots_; }

  /// Evaluate at n points given per-axis coordinate arrays (each of length n)
  /// and a common time t. Throws EvalError if any output is non-finite.
  void eval(std::span<const std::vector<double>> coords, double t,
            std::span<double> out) const {
    const std::size_t n = out.size();
    std::vector<std::vector<double>> buf(
        static_cast<std::size_t>(n_slots_), std::vector<double>(n));
    eval_into(coords, t, out, buf);
  }

  /// Same as eval() but with caller-provided scratch (resized as needed).
  void eval_into(std::span<const std::vector<double>> coords, double t,
                 std::span<double> out,
                 std::vector<std::vector<double>>& scratch) const {
    const std::size_t n = out.size();
    if (scratch.size() < static_cast<std::size_t>(n_slots_))
      scratch.resize(static_cast<std::size_t>(n_slots_));
    for (auto& b : scratch)
      if (b.size() < n) b.resize(n);
    using dsl::Op;
    for (const auto& ins : code_) {
      double* dst = scratch[static_cast<std::size_t>(ins.dst)].data();
      switch (ins.op) {
        case Op::kConst:
          for (std::size_t i = 0; i < n; ++i) dst[i] = ins.value;
          break;
        case Op::kVar: {
          if (ins.var == kTimeVar) {
            for (std::size_t i = 0; i < n; ++i) dst[i] = t;
          } else {
            if (static_cast<std::size_t>(ins.var) >= coords.size())
              throw EvalError("variable x" + std::to_string(ins.var + 1) +
                              " out of range for grid evaluation");
            const double* src = coords[static_cast<std::size_t>(ins.var)].data();
            for (std::size_t i = 0; i < n; ++i) dst[i] = src[i];
          }
          break;
        }
        case Op::kAdd:
        case Op::kSub:
        case Op::kMul:
        case Op::kDiv:
        case Op::kPow:
        case Op::kMin:
        case Op::kMax: {
          const double* a = scratch[static_cast<std::size_t>(ins.a)].data();
          const double* b = scratch[static_cast<std::size_t>(ins.b)].data();
          switch (ins.op) {
            case Op::kAdd:
              for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
              break;
            case Op::kSub:
              for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
              break;
            case Op::kMul:
              for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
              break;
            case Op::kDiv:
              for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] / b[i];
              break;
            case Op::kPow:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::pow(a[i], b[i]);
              break;
            case Op::kMin:
              for (std::size_t i = 0; i < n; ++i)
                dst[i] = a[i] <= b[i] ? a[i] : b[i];
              break;
            case Op::kMax:
              for (std::size_t i = 0; i < n; ++i)
                dst[i] = a[i] >= b[i] ? a[i] : b[i];
              break;
            default:
              break;
          }
          break;
        }
        default: {
          const double* a = scratch[static_cast<std::size_t>(ins.a)].data();
          switch (ins.op) {
            case Op::kNeg:
              for (std::size_t i = 0; i < n; ++i) dst[i] = -a[i];
              break;
            case Op::kSin:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::sin(a[i]);
              break;
            case Op::kCos:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::cos(a[i]);
              break;
            case Op::kExp:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::exp(a[i]);
              break;
            case Op::kSqrt:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::sqrt(a[i]);
              break;
            case Op::kAbs:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::fabs(a[i]);
              break;
            case Op::kTanh:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::tanh(a[i]);
              break;
            case Op::kLog:
              for (std::size_t i = 0; i < n; ++i) dst[i] = std::log(a[i]);
              break;
            case Op::kSign:
              for (std::size_t i = 0; i < n; ++i)
                dst[i] = a[i] > 0.0 ? 1.0 : (a[i] < 0.0 ? -1.0 : 0.0);
              break;
            case Op::kStep:
              for (std::size_t i = 0; i < n; ++i)
                dst[i] = a[i] >= 0.0 ? 1.0 : 0.0;
              break;
            default:
              break;
          }
          break;
        }
      }
    }
    const double* res = scratch[static_cast<std::size_t>(result_slot_)].data();
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = res[i];
      if (!std::isfinite(out[i]))
        throw EvalError("non-finite value in grid evaluation");
    }
  }

 private:
  struct Instr {
    dsl::Op op;
    int dst = 0, a = 0, b = 0;
    double value = 0.0;
    int var = 0;
  };

  int compile(const dsl::NodePtr& n) {
    using dsl::Op;
    Instr ins;
    ins.op = n->op;
    if (n->op == Op::kConst) {
      ins.value = n->value;
      ins.dst = alloc();
    } else if (n->op == Op::kVar) {
      ins.var = n->var;
      ins.dst = alloc();
    } else if (n->b) {
      ins.a = compile(n->a);
      ins.b = compile(n->b);
      release(ins.b);
      release(ins.a);
      ins.dst = alloc();
    } else {
      ins.a = compile(n->a);
      release(ins.a);
      ins.dst = alloc();
    }
    code_.push_back(ins);
    return ins.dst;
  }

  int alloc() {
    if (!free_.empty()) {
      const int s = free_.back();
      free_.pop_back();
      return s;
    }
    return n_slots_++;
  }
  void release(int s) { free_.push_back(s); }

  std::vector<Instr> code_;
  std::vector<int> free_;
  int n_slots_ = 0;
  int result_slot_ = 0;
};

/// Result of a sampling-based Lipschitz scan; never a certified bound.
struct LipschitzEstimate {
  double value = 0.0;
  bool certified = false;  // sampling may over- or under-estimate
};

}  // namespace anisospec
