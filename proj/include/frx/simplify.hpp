#pragma once

#include <cmath>

#include "frx/eval.hpp"
#include "frx/expr.hpp"

namespace frx {

namespace detail {

// Fold an all-constant node when doing so cannot change where the expression
// is defined: divisions by (near-)zero, square roots of negatives and
// non-real powers are left alone, as is "+-" (its value depends on the
// branch choice made at evaluation time).
inline Expr try_fold(ExprKind k, const Expr& l, const Expr& r) {
  double a = l.number_value();
  double b = r ? r.number_value() : 0.0;
  switch (k) {
    case ExprKind::Add: return Expr::number(a + b);
    case ExprKind::Sub: return Expr::number(a - b);
    case ExprKind::Mul: return Expr::number(a * b);
    case ExprKind::Div:
      if (std::fabs(b) < kDivTol) return Expr{};
      return Expr::number(a / b);
    case ExprKind::Pow: {
      if (a == 0.0 && b == 0.0) return Expr{};  // 0^0 stays as written
      double v = std::pow(a, b);
      if (std::isnan(v)) return Expr{};
      return Expr::number(v);
    }
    case ExprKind::Neg: return Expr::number(-a);
    case ExprKind::Sqrt:
      if (a < 0.0) return Expr{};
      return Expr::number(std::sqrt(a));
    case ExprKind::Sin: return Expr::number(std::sin(a));
    case ExprKind::Cos: return Expr::number(std::cos(a));
    case ExprKind::Exp: return Expr::number(std::exp(a));
    default: return Expr{};
  }
}

inline Expr simplify_once(const Expr& e) {
  switch (arity_of(e.kind())) {
    case 0:
      return e;
    case 1: {
      Expr c = simplify_once(e.operand());
      if (c.is(ExprKind::Constant)) {
        if (Expr folded = try_fold(e.kind(), c, Expr{})) return folded;
      }
      if (e.is(ExprKind::Neg) && c.is(ExprKind::Neg)) return c.operand();
      if (structurally_equal(c, e.operand())) return e;
      return Expr::unary(e.kind(), std::move(c));
    }
    default: {
      Expr l = simplify_once(e.left());
      Expr r = simplify_once(e.right());
      if (l.is(ExprKind::Constant) && r.is(ExprKind::Constant) &&
          !e.is(ExprKind::PlusMinus)) {
        if (Expr folded = try_fold(e.kind(), l, r)) return folded;
      }
      switch (e.kind()) {
        case ExprKind::Add:
          if (l.is_number(0.0)) return r;
          if (r.is_number(0.0)) return l;
          break;
        case ExprKind::Sub:
          if (r.is_number(0.0)) return l;
          if (l.is_number(0.0)) return Expr::neg(std::move(r));
          break;
        case ExprKind::Mul:
          if (l.is_number(0.0) || r.is_number(0.0)) return Expr::number(0.0);
          if (l.is_number(1.0)) return r;
          if (r.is_number(1.0)) return l;
          break;
        case ExprKind::Div:
          // 0/0 is left as written rather than invented to be 0.
          if (l.is_number(0.0) && !r.is_number(0.0)) return Expr::number(0.0);
          if (r.is_number(1.0)) return l;
          break;
        case ExprKind::Pow: {
          if (r.is_number(1.0)) return l;
          if (r.is_number(0.0) && !l.is_number(0.0)) return Expr::number(1.0);
          // Hoist a constant factor out of the base: (c*e)^n -> c^n * e^n.
          // Sound for c > 0 at any exponent, and for c < 0 at integer
          // exponents; skipped when c^n is not finite.
          if (r.is(ExprKind::Constant) && l.is(ExprKind::Mul)) {
            Expr cf, rest;
            if (l.left().is(ExprKind::Constant)) {
              cf = l.left();
              rest = l.right();
            } else if (l.right().is(ExprKind::Constant)) {
              cf = l.right();
              rest = l.left();
            }
            if (cf) {
              double c = cf.number_value();
              double n = r.number_value();
              bool integer_n = std::isfinite(n) && std::rint(n) == n;
              if (c != 0.0 && (c > 0.0 || integer_n)) {
                double cn = std::pow(c, n);
                if (std::isfinite(cn))
                  return Expr::mul(Expr::number(cn),
                                   Expr::pow(std::move(rest), std::move(r)));
              }
            }
          }
          break;
        }
        case ExprKind::PlusMinus:
          if (r.is_number(0.0)) return l;  // both branches agree
          break;
        default:
          break;
      }
      if (structurally_equal(l, e.left()) && structurally_equal(r, e.right()))
        return e;
      return Expr::binary(e.kind(), std::move(l), std::move(r));
    }
  }
}

}  // namespace detail

// Value-preserving simplification, iterated to a fixed point. Every rewrite
// either shrinks the tree or hoists a constant out of a power base (which can
// happen only once per such base), so this terminates. The result evaluates
// identically to the input at every binding where the input is defined.
inline Expr simplify(const Expr& e) {
  Expr cur = e;
  for (;;) {
    Expr next = detail::simplify_once(cur);
    if (structurally_equal(next, cur)) return cur;
    cur = std::move(next);
  }
}

}  // namespace frx
