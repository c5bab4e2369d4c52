#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "frx/expr.hpp"
#include "frx/numformat.hpp"

namespace frx {

// Canonical form: negations of numeric literals are folded into negative
// constants, and the operand chains of the commutative operators (+, *) are
// flattened, sorted by the canonical expression order, and rebuilt
// left-deep. Non-commutative operators keep their operand order.
inline Expr canonicalize(const Expr& e) {
  switch (arity_of(e.kind())) {
    case 0:
      return e;
    case 1: {
      Expr c = canonicalize(e.operand());
      if (e.is(ExprKind::Neg) && c.is(ExprKind::Constant))
        return Expr::number(-c.number_value());
      if (structurally_equal(c, e.operand())) return e;
      return Expr::unary(e.kind(), std::move(c));
    }
    default: {
      Expr l = canonicalize(e.left());
      Expr r = canonicalize(e.right());
      if (e.is(ExprKind::Add) || e.is(ExprKind::Mul)) {
        std::vector<Expr> ops;
        auto flatten = [&](auto&& self, const Expr& x) -> void {
          if (x.kind() == e.kind()) {
            self(self, x.left());
            self(self, x.right());
          } else {
            ops.push_back(x);
          }
        };
        flatten(flatten, l);
        flatten(flatten, r);
        std::stable_sort(ops.begin(), ops.end(),
                         [](const Expr& a, const Expr& b) {
                           return compare(a, b) < 0;
                         });
        Expr acc = ops.front();
        for (std::size_t i = 1; i < ops.size(); ++i)
          acc = Expr::binary(e.kind(), std::move(acc), ops[i]);
        return acc;
      }
      if (structurally_equal(l, e.left()) && structurally_equal(r, e.right()))
        return e;
      return Expr::binary(e.kind(), std::move(l), std::move(r));
    }
  }
}

enum class RenderStyle {
  plain,     // minimal parentheses, ASCII
  unicode,   // like plain, but rho/plus-minus as glyphs
  machine,   // every compound fully parenthesized; reparses to the same tree
};

namespace detail {

inline int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::PlusMinus:
      return 1;
    case ExprKind::Mul:
    case ExprKind::Div:
      return 2;
    case ExprKind::Neg:
      return 3;
    case ExprKind::Pow:
      return 4;
    default:
      return 5;  // leaves and calls
  }
}

inline std::string leaf_text(const Expr& e, RenderStyle style) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return format_double(e.number_value());
    case ExprKind::Variable:
    case ExprKind::FnSymbol:
      return e.name();
    case ExprKind::ProbRef: {
      const char* prefix = e.prob_normalized()
                               ? (style == RenderStyle::unicode ? "ρ_"
                                                                : "rho_")
                               : "p_";
      return prefix + std::to_string(e.prob_index());
    }
    default:
      throw Error("leaf_text on non-leaf");
  }
}

inline const char* call_name(ExprKind k) {
  switch (k) {
    case ExprKind::Sqrt: return "sqrt";
    case ExprKind::Sin: return "sin";
    case ExprKind::Cos: return "cos";
    case ExprKind::Exp: return "exp";
    default: throw Error("not a call kind");
  }
}

inline const char* infix_text(ExprKind k, RenderStyle style) {
  switch (k) {
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    case ExprKind::Div: return "/";
    case ExprKind::Pow: return "^";
    case ExprKind::PlusMinus:
      return style == RenderStyle::unicode ? "±" : "+-";
    default: throw Error("not an infix kind");
  }
}

inline std::string render_rec(const Expr& e, RenderStyle style) {
  ExprKind k = e.kind();
  switch (k) {
    case ExprKind::Constant:
    case ExprKind::Variable:
    case ExprKind::FnSymbol:
    case ExprKind::ProbRef:
      return leaf_text(e, style);
    case ExprKind::Sqrt:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      return std::string(call_name(k)) + "(" + render_rec(e.operand(), style) +
             ")";
    case ExprKind::Neg: {
      std::string inner = render_rec(e.operand(), style);
      if (style == RenderStyle::machine) return "(-" + inner + ")";
      if (e.operand().is_leaf() && inner[0] != '-') return "-" + inner;
      return "-(" + inner + ")";
    }
    case ExprKind::Pow: {
      // The grammar parses -x^2 as (-x)^2 and a^b^c as a^(b^c); parenthesize
      // every non-leaf (and every '-'-leading) side so the text reads the
      // same way it parses.
      auto side = [&](const Expr& x) {
        std::string t = render_rec(x, style);
        bool wrap = style == RenderStyle::machine ? false
                                                  : (!x.is_leaf() || t[0] == '-');
        return wrap ? "(" + t + ")" : t;
      };
      std::string body = side(e.left()) + "^" + side(e.right());
      return style == RenderStyle::machine ? "(" + body + ")" : body;
    }
    default: {  // infix binary
      int myprec = precedence(k);
      std::string lt = render_rec(e.left(), style);
      std::string rt = render_rec(e.right(), style);
      if (style == RenderStyle::machine) {
        // Fully parenthesized already; only guard a '-'-leading right operand
        // so "a + -3" cannot re-lex as the "+-" operator.
        if (rt[0] == '-') rt = "(" + rt + ")";
        return "(" + lt + infix_text(k, style) + rt + ")";
      }
      if (precedence(e.left().kind()) < myprec) lt = "(" + lt + ")";
      if (precedence(e.right().kind()) <= myprec || rt[0] == '-')
        rt = "(" + rt + ")";
      return lt + infix_text(k, style) + rt;
    }
  }
}

}  // namespace detail

inline std::string render(const Expr& e, RenderStyle style = RenderStyle::plain) {
  return detail::render_rec(e, style);
}

inline std::string canonical_text(const Expr& e,
                                  RenderStyle style = RenderStyle::plain) {
  return render(canonicalize(e), style);
}

}  // namespace frx
