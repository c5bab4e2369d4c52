#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "frx/error.hpp"

namespace frx {

// Node kinds, listed in canonical ordering rank: constants sort before
// variables, variables before function symbols, function symbols before
// probability references, and every leaf before any compound.
enum class ExprKind {
  Constant,
  Variable,
  FnSymbol,   // an unexpanded node function, e.g. Q in a collapsed rule
  ProbRef,    // symbolic edge probability: p_k (raw) or rho_k (normalized)
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Sqrt,
  Sin,
  Cos,
  Exp,
  PlusMinus,  // two-branch operator written "+-", rendered as a single token
};

inline const char* kind_name(ExprKind k) {
  switch (k) {
    case ExprKind::Constant: return "constant";
    case ExprKind::Variable: return "variable";
    case ExprKind::FnSymbol: return "function symbol";
    case ExprKind::ProbRef: return "probability reference";
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    case ExprKind::Div: return "/";
    case ExprKind::Neg: return "negation";
    case ExprKind::Pow: return "^";
    case ExprKind::Sqrt: return "sqrt";
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Exp: return "exp";
    case ExprKind::PlusMinus: return "+-";
  }
  return "?";
}

inline int arity_of(ExprKind k) {
  switch (k) {
    case ExprKind::Constant:
    case ExprKind::Variable:
    case ExprKind::FnSymbol:
    case ExprKind::ProbRef:
      return 0;
    case ExprKind::Neg:
    case ExprKind::Sqrt:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      return 1;
    default:
      return 2;
  }
}

// Which branch of a "+-" operator to take.
enum class PmBranch { plus, minus };

struct ExprNode;

// Immutable expression tree. An Expr is a cheap shared handle; subtrees are
// freely shared and never mutated, so every transformation returns a new tree.
class Expr {
 public:
  Expr() = default;

  static Expr number(double v);
  static Expr variable(std::string name);
  static Expr fn_symbol(std::string name);
  static Expr prob_ref(int edge_id, bool normalized);
  static Expr unary(ExprKind k, Expr operand);
  static Expr binary(ExprKind k, Expr l, Expr r);

  static Expr add(Expr l, Expr r) { return binary(ExprKind::Add, std::move(l), std::move(r)); }
  static Expr sub(Expr l, Expr r) { return binary(ExprKind::Sub, std::move(l), std::move(r)); }
  static Expr mul(Expr l, Expr r) { return binary(ExprKind::Mul, std::move(l), std::move(r)); }
  static Expr div(Expr l, Expr r) { return binary(ExprKind::Div, std::move(l), std::move(r)); }
  static Expr pow(Expr base, Expr exponent) { return binary(ExprKind::Pow, std::move(base), std::move(exponent)); }
  static Expr plus_minus(Expr l, Expr r) { return binary(ExprKind::PlusMinus, std::move(l), std::move(r)); }
  static Expr neg(Expr x) { return unary(ExprKind::Neg, std::move(x)); }
  static Expr sqrt(Expr x) { return unary(ExprKind::Sqrt, std::move(x)); }
  static Expr sin(Expr x) { return unary(ExprKind::Sin, std::move(x)); }
  static Expr cos(Expr x) { return unary(ExprKind::Cos, std::move(x)); }
  static Expr exp(Expr x) { return unary(ExprKind::Exp, std::move(x)); }

  explicit operator bool() const { return node_ != nullptr; }

  ExprKind kind() const;
  bool is(ExprKind k) const;
  bool is_leaf() const { return arity_of(kind()) == 0; }

  double number_value() const;
  // True for a literal numeric leaf equal to v (so -0 counts as 0).
  bool is_number(double v) const;
  const std::string& name() const;
  int prob_index() const;
  bool prob_normalized() const;

  const Expr& left() const;
  const Expr& right() const;
  // Sole operand of a unary node.
  const Expr& operand() const;

 private:
  static Expr make(ExprKind k);
  static Expr require(Expr e) {
    if (!e) throw Error("null subexpression");
    return e;
  }
  ExprNode& mut();
  const ExprNode& req() const;
  void check_kind(ExprKind k) const;

  std::shared_ptr<const ExprNode> node_;
};

struct ExprNode {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;
  std::string name;
  int prob_index = 0;
  bool prob_normalized = false;
  Expr child[2];
};

inline Expr Expr::make(ExprKind k) {
  Expr e;
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  e.node_ = std::move(n);
  return e;
}

inline ExprNode& Expr::mut() { return const_cast<ExprNode&>(*node_); }

inline const ExprNode& Expr::req() const {
  if (!node_) throw Error("use of empty expression");
  return *node_;
}

inline void Expr::check_kind(ExprKind k) const {
  if (req().kind != k)
    throw Error(std::string("expression is a ") + kind_name(req().kind) +
                ", not a " + kind_name(k));
}

inline Expr Expr::number(double v) {
  Expr e = make(ExprKind::Constant);
  e.mut().value = v;
  return e;
}

inline Expr Expr::variable(std::string name) {
  Expr e = make(ExprKind::Variable);
  e.mut().name = std::move(name);
  return e;
}

inline Expr Expr::fn_symbol(std::string name) {
  Expr e = make(ExprKind::FnSymbol);
  e.mut().name = std::move(name);
  return e;
}

inline Expr Expr::prob_ref(int edge_id, bool normalized) {
  Expr e = make(ExprKind::ProbRef);
  e.mut().prob_index = edge_id;
  e.mut().prob_normalized = normalized;
  return e;
}

inline Expr Expr::unary(ExprKind k, Expr operand) {
  if (arity_of(k) != 1) throw Error("unary() given non-unary kind");
  Expr e = make(k);
  e.mut().child[0] = require(std::move(operand));
  return e;
}

inline Expr Expr::binary(ExprKind k, Expr l, Expr r) {
  if (arity_of(k) != 2) throw Error("binary() given non-binary kind");
  Expr e = make(k);
  e.mut().child[0] = require(std::move(l));
  e.mut().child[1] = require(std::move(r));
  return e;
}

inline ExprKind Expr::kind() const { return req().kind; }

inline bool Expr::is(ExprKind k) const { return node_ && node_->kind == k; }

inline double Expr::number_value() const {
  check_kind(ExprKind::Constant);
  return req().value;
}

inline bool Expr::is_number(double v) const {
  return is(ExprKind::Constant) && node_->value == v;
}

inline const std::string& Expr::name() const {
  if (!is(ExprKind::Variable) && !is(ExprKind::FnSymbol))
    throw Error("name() on a node without a name");
  return node_->name;
}

inline int Expr::prob_index() const {
  check_kind(ExprKind::ProbRef);
  return req().prob_index;
}

inline bool Expr::prob_normalized() const {
  check_kind(ExprKind::ProbRef);
  return req().prob_normalized;
}

inline const Expr& Expr::left() const {
  if (arity_of(kind()) < 1) throw Error("left() on a leaf");
  return node_->child[0];
}

inline const Expr& Expr::right() const {
  if (arity_of(kind()) < 2) throw Error("right() on a non-binary node");
  return node_->child[1];
}

inline const Expr& Expr::operand() const {
  if (arity_of(kind()) != 1) throw Error("operand() on a non-unary node");
  return node_->child[0];
}

inline Expr operator+(Expr l, Expr r) { return Expr::add(std::move(l), std::move(r)); }
inline Expr operator-(Expr l, Expr r) { return Expr::sub(std::move(l), std::move(r)); }
inline Expr operator*(Expr l, Expr r) { return Expr::mul(std::move(l), std::move(r)); }
inline Expr operator/(Expr l, Expr r) { return Expr::div(std::move(l), std::move(r)); }
inline Expr operator-(Expr x) { return Expr::neg(std::move(x)); }

// Total order on doubles (IEEE 754 totalOrder): -inf < ... < -0 < +0 < ... .
// libstdc++ 11 does not implement std::strong_order for floating point, so
// we order by sign-folded bit patterns instead.
inline int total_order_compare(double a, double b) {
  auto key = [](double d) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
    return (bits & 0x8000000000000000ull) ? ~bits
                                          : bits | 0x8000000000000000ull;
  };
  std::uint64_t ka = key(a), kb = key(b);
  return ka < kb ? -1 : ka > kb ? 1 : 0;
}

// Canonical total order over expressions: by kind rank first, then by the
// kind's own payload (value / name / edge id), then recursively by children.
inline int compare(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind())
    return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::Constant:
      return total_order_compare(a.number_value(), b.number_value());
    case ExprKind::Variable:
    case ExprKind::FnSymbol: {
      int c = a.name().compare(b.name());
      return c < 0 ? -1 : c > 0 ? 1 : 0;
    }
    case ExprKind::ProbRef: {
      if (a.prob_index() != b.prob_index())
        return a.prob_index() < b.prob_index() ? -1 : 1;
      if (a.prob_normalized() != b.prob_normalized())
        return a.prob_normalized() ? 1 : -1;
      return 0;
    }
    default: {
      int c = compare(a.left(), b.left());
      if (c != 0) return c;
      if (arity_of(a.kind()) == 2) return compare(a.right(), b.right());
      return 0;
    }
  }
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
  return compare(a, b) == 0;
}

// Names of all Variable leaves in e.
inline void collect_variables(const Expr& e, std::set<std::string>& out) {
  switch (arity_of(e.kind())) {
    case 0:
      if (e.is(ExprKind::Variable)) out.insert(e.name());
      return;
    case 1:
      collect_variables(e.operand(), out);
      return;
    default:
      collect_variables(e.left(), out);
      collect_variables(e.right(), out);
  }
}

inline std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

inline bool contains_kind(const Expr& e, ExprKind k) {
  if (e.kind() == k) return true;
  switch (arity_of(e.kind())) {
    case 0: return false;
    case 1: return contains_kind(e.operand(), k);
    default:
      return contains_kind(e.left(), k) || contains_kind(e.right(), k);
  }
}

inline bool contains_subtree(const Expr& e, const Expr& pattern) {
  if (structurally_equal(e, pattern)) return true;
  switch (arity_of(e.kind())) {
    case 0: return false;
    case 1: return contains_subtree(e.operand(), pattern);
    default:
      return contains_subtree(e.left(), pattern) ||
             contains_subtree(e.right(), pattern);
  }
}

// Replaces Variable leaves by name. Leaves without a mapping are kept.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& vars) {
  switch (arity_of(e.kind())) {
    case 0: {
      if (e.is(ExprKind::Variable)) {
        auto it = vars.find(e.name());
        if (it != vars.end()) return it->second;
      }
      return e;
    }
    case 1: {
      Expr c = substitute(e.operand(), vars);
      if (structurally_equal(c, e.operand())) return e;
      return Expr::unary(e.kind(), std::move(c));
    }
    default: {
      Expr l = substitute(e.left(), vars);
      Expr r = substitute(e.right(), vars);
      if (structurally_equal(l, e.left()) && structurally_equal(r, e.right()))
        return e;
      return Expr::binary(e.kind(), std::move(l), std::move(r));
    }
  }
}

// Rewrites every "+-" node to the chosen branch.
inline Expr resolve_plus_minus(const Expr& e, PmBranch branch) {
  switch (arity_of(e.kind())) {
    case 0:
      return e;
    case 1: {
      Expr c = resolve_plus_minus(e.operand(), branch);
      if (structurally_equal(c, e.operand())) return e;
      return Expr::unary(e.kind(), std::move(c));
    }
    default: {
      Expr l = resolve_plus_minus(e.left(), branch);
      Expr r = resolve_plus_minus(e.right(), branch);
      if (e.is(ExprKind::PlusMinus)) {
        return branch == PmBranch::plus ? Expr::add(std::move(l), std::move(r))
                                        : Expr::sub(std::move(l), std::move(r));
      }
      if (structurally_equal(l, e.left()) && structurally_equal(r, e.right()))
        return e;
      return Expr::binary(e.kind(), std::move(l), std::move(r));
    }
  }
}

}  // namespace frx
