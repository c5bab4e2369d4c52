#pragma once

#include <string>

#include "frx/expr.hpp"
#include "frx/simplify.hpp"

namespace frx {

namespace detail {

inline Expr d(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::ProbRef:
      return Expr::number(0.0);
    case ExprKind::Variable:
      return Expr::number(e.name() == var ? 1.0 : 0.0);
    case ExprKind::FnSymbol:
      throw ValidationError("cannot differentiate through function symbol '" +
                            e.name() + "'");
    case ExprKind::Add:
      return Expr::add(d(e.left(), var), d(e.right(), var));
    case ExprKind::Sub:
      return Expr::sub(d(e.left(), var), d(e.right(), var));
    case ExprKind::Mul:
      return Expr::add(Expr::mul(d(e.left(), var), e.right()),
                       Expr::mul(e.left(), d(e.right(), var)));
    case ExprKind::Div:
      return Expr::div(Expr::sub(Expr::mul(d(e.left(), var), e.right()),
                                 Expr::mul(e.left(), d(e.right(), var))),
                       Expr::pow(e.right(), Expr::number(2.0)));
    case ExprKind::Neg:
      return Expr::neg(d(e.operand(), var));
    case ExprKind::Pow: {
      if (free_variables(e.right()).count(var))
        throw ValidationError(
            "cannot differentiate a power whose exponent depends on '" + var +
            "'");
      // d(u^c) = c * u^(c-1) * u'
      return Expr::mul(
          Expr::mul(e.right(),
                    Expr::pow(e.left(),
                              Expr::sub(e.right(), Expr::number(1.0)))),
          d(e.left(), var));
    }
    case ExprKind::Sqrt:
      return Expr::div(d(e.operand(), var),
                       Expr::mul(Expr::number(2.0), Expr::sqrt(e.operand())));
    case ExprKind::Sin:
      return Expr::mul(Expr::cos(e.operand()), d(e.operand(), var));
    case ExprKind::Cos:
      return Expr::mul(Expr::neg(Expr::sin(e.operand())), d(e.operand(), var));
    case ExprKind::Exp:
      return Expr::mul(Expr::exp(e.operand()), d(e.operand(), var));
    case ExprKind::PlusMinus:
      throw ValidationError(
          "cannot differentiate an unresolved '+-'; pick a branch first");
  }
  throw Error("unreachable expression kind");
}

}  // namespace detail

// Symbolic partial derivative with respect to `var`, simplified.
inline Expr differentiate(const Expr& e, const std::string& var) {
  return simplify(detail::d(e, var));
}

}  // namespace frx
