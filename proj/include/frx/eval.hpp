#pragma once

#include <cmath>
#include <map>
#include <string>

#include "frx/expr.hpp"
#include "frx/numformat.hpp"

namespace frx {

inline constexpr double kDivTol = 1e-12;

// Everything a numeric evaluation may need. Probability references resolve
// against `probs` (raw values, p_k) or `rhos` (normalized values, rho_k)
// depending on which form the reference carries.
struct Binding {
  std::map<std::string, double> vars;
  std::map<std::string, double> fn_values;  // values for function symbols
  std::map<int, double> probs;
  std::map<int, double> rhos;
  PmBranch pm_branch = PmBranch::plus;
};

struct EvalOptions {
  // A divisor with |d| below this is treated as zero.
  double div_tol = kDivTol;
};

inline double evaluate(const Expr& e, const Binding& b,
                       const EvalOptions& opt = {}) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e.number_value();
    case ExprKind::Variable: {
      auto it = b.vars.find(e.name());
      if (it == b.vars.end())
        throw UnboundSymbolError("unbound variable '" + e.name() + "'");
      return it->second;
    }
    case ExprKind::FnSymbol: {
      auto it = b.fn_values.find(e.name());
      if (it == b.fn_values.end())
        throw UnboundSymbolError("unbound function symbol '" + e.name() + "'");
      return it->second;
    }
    case ExprKind::ProbRef: {
      const auto& table = e.prob_normalized() ? b.rhos : b.probs;
      auto it = table.find(e.prob_index());
      if (it == table.end())
        throw UnboundSymbolError(
            std::string("unbound probability ") +
            (e.prob_normalized() ? "rho_" : "p_") +
            std::to_string(e.prob_index()));
      return it->second;
    }
    case ExprKind::Add:
      return evaluate(e.left(), b, opt) + evaluate(e.right(), b, opt);
    case ExprKind::Sub:
      return evaluate(e.left(), b, opt) - evaluate(e.right(), b, opt);
    case ExprKind::Mul:
      return evaluate(e.left(), b, opt) * evaluate(e.right(), b, opt);
    case ExprKind::Div: {
      double num = evaluate(e.left(), b, opt);
      double den = evaluate(e.right(), b, opt);
      if (std::fabs(den) < opt.div_tol)
        throw DivisionByZeroError("division by zero (denominator " +
                                  format_double(den) + ")");
      return num / den;
    }
    case ExprKind::Neg:
      return -evaluate(e.operand(), b, opt);
    case ExprKind::Pow: {
      double base = evaluate(e.left(), b, opt);
      double expo = evaluate(e.right(), b, opt);
      double r = std::pow(base, expo);
      if (std::isnan(r) && !std::isnan(base) && !std::isnan(expo))
        throw DomainError("non-real power: base " + format_double(base) +
                          ", exponent " + format_double(expo));
      return r;
    }
    case ExprKind::Sqrt: {
      double x = evaluate(e.operand(), b, opt);
      if (x < 0.0)
        throw DomainError("square root of negative value " + format_double(x));
      return std::sqrt(x);
    }
    case ExprKind::Sin:
      return std::sin(evaluate(e.operand(), b, opt));
    case ExprKind::Cos:
      return std::cos(evaluate(e.operand(), b, opt));
    case ExprKind::Exp:
      return std::exp(evaluate(e.operand(), b, opt));
    case ExprKind::PlusMinus: {
      double l = evaluate(e.left(), b, opt);
      double r = evaluate(e.right(), b, opt);
      return b.pm_branch == PmBranch::plus ? l + r : l - r;
    }
  }
  throw Error("unreachable expression kind");
}

}  // namespace frx
