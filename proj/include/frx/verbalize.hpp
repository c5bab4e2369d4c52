#pragma once

#include <string>
#include <vector>

#include "frx/extraction.hpp"
#include "frx/registry.hpp"

namespace frx {
namespace detail {

// One worded clause under construction: leading modifiers ("negative",
// "square root of", ...), numeric factors, display names, and probability
// symbols, all in discovery order.
struct ClauseParts {
  std::vector<std::string> modifiers;
  std::vector<std::string> constants;
  std::vector<std::string> displays;
  std::vector<std::string> prob_symbols;
};

inline std::string prob_symbol(const Expr& p) {
  return (p.prob_normalized() ? "ρ_" : "p_") +
         std::to_string(p.prob_index());
}

inline bool splits_clauses(const Expr& e) {
  return contains_kind(e, ExprKind::Add) || contains_kind(e, ExprKind::Sub) ||
         contains_kind(e, ExprKind::PlusMinus) ||
         contains_kind(e, ExprKind::Div) || contains_kind(e, ExprKind::Sqrt);
}

// Flatten one multiplicative term into clause parts.
inline void gather_term(const Expr& e, const Registry& reg, ClauseParts& c) {
  switch (e.kind()) {
    case ExprKind::Mul:
      gather_term(e.left(), reg, c);
      gather_term(e.right(), reg, c);
      return;
    case ExprKind::Constant:
      c.constants.push_back(format_double(e.number_value()));
      return;
    case ExprKind::Variable:  // weights and inputs carry no wording
      return;
    case ExprKind::FnSymbol:
      c.displays.push_back(reg.at(e.name()).display_name);
      return;
    case ExprKind::ProbRef:
      c.prob_symbols.push_back(prob_symbol(e));
      return;
    case ExprKind::Neg:
      c.modifiers.push_back("negative");
      gather_term(e.operand(), reg, c);
      return;
    case ExprKind::Pow:
      c.modifiers.push_back(e.right().is_number(2.0)
                                ? "squared"
                                : "to the power " + render(e.right()));
      gather_term(e.left(), reg, c);
      return;
    case ExprKind::Sin:
      c.modifiers.push_back("sine of");
      gather_term(e.operand(), reg, c);
      return;
    case ExprKind::Cos:
      c.modifiers.push_back("cosine of");
      gather_term(e.operand(), reg, c);
      return;
    case ExprKind::Exp:
      c.modifiers.push_back("exponential of");
      gather_term(e.operand(), reg, c);
      return;
    default:  // nested additive structure is handled by the caller's walk
      return;
  }
}

inline void emit_clause(const Expr& e, const Registry& reg,
                        std::vector<std::string> modifiers,
                        std::vector<std::string>& clauses) {
  ClauseParts c;
  c.modifiers = std::move(modifiers);
  gather_term(e, reg, c);
  if (c.displays.empty()) return;  // nothing comprehensible to word
  std::string text;
  for (const std::string& m : c.modifiers) text += m + " ";
  for (const std::string& k : c.constants) text += k + " ";
  for (std::size_t i = 0; i < c.displays.size(); ++i) {
    if (i) text += " and ";
    text += c.displays[i];
  }
  if (!c.prob_symbols.empty()) {
    text += " at probability ";
    for (const std::string& s : c.prob_symbols) text += s;
  }
  clauses.push_back(text);
}

// Split an expression into worded clauses at additive boundaries, fraction
// sides, and square roots; multiplicative terms become single clauses.
inline void clause_walk(const Expr& e, const Registry& reg,
                        std::vector<std::string> modifiers,
                        std::vector<std::string>& clauses) {
  switch (e.kind()) {
    case ExprKind::Add:
      clause_walk(e.left(), reg, modifiers, clauses);
      clause_walk(e.right(), reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Sub: {
      clause_walk(e.left(), reg, modifiers, clauses);
      modifiers.push_back("negative");
      clause_walk(e.right(), reg, std::move(modifiers), clauses);
      return;
    }
    case ExprKind::PlusMinus:
      clause_walk(e.left(), reg, modifiers, clauses);
      clause_walk(e.right(), reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Div:
      clause_walk(e.left(), reg, modifiers, clauses);
      clause_walk(e.right(), reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Neg:
      modifiers.push_back("negative");
      clause_walk(e.operand(), reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Sqrt:
      modifiers.push_back("square root of");
      clause_walk(e.operand(), reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Pow:
      if (splits_clauses(e.left())) {
        modifiers.push_back(e.right().is_number(2.0)
                                ? "squared"
                                : "to the power " + render(e.right()));
        clause_walk(e.left(), reg, std::move(modifiers), clauses);
        return;
      }
      emit_clause(e, reg, std::move(modifiers), clauses);
      return;
    case ExprKind::Mul: {
      // A product whose factors hide additive structure walks each factor;
      // a plain product is one clause.
      if (splits_clauses(e)) {
        clause_walk(e.left(), reg, modifiers, clauses);
        clause_walk(e.right(), reg, std::move(modifiers), clauses);
        return;
      }
      emit_clause(e, reg, std::move(modifiers), clauses);
      return;
    }
    default:
      emit_clause(e, reg, std::move(modifiers), clauses);
      return;
  }
}

}  // namespace detail

// Deterministic worded statement of a rule: the outermost probability and
// function name frame the sentence, and the substituted body (if any)
// becomes a comma-separated clause list.
inline std::string render_informal(const Rule& rule, const Registry& reg,
                                   const ProbabilityAssignment& pa) {
  if (rule.normalized && !pa.rho)
    throw ValidationError(
        "rule uses normalized probabilities but the assignment has none");

  const ComprehensiveFunction& out_fc = reg.at(rule.output_fn);

  // Peel the outermost probability off the top-level product; what remains
  // is the worded material.
  std::vector<Expr> factors;
  auto flatten = [&](auto&& self, const Expr& e) -> void {
    if (e.is(ExprKind::Mul)) {
      self(self, e.left());
      self(self, e.right());
    } else {
      factors.push_back(e);
    }
  };
  flatten(flatten, rule.expr);
  std::vector<Expr> rest;
  bool peeled = false;
  for (const Expr& f : factors) {
    if (!peeled && f.is(ExprKind::ProbRef) &&
        f.prob_index() == rule.output_edge) {
      peeled = true;
      continue;
    }
    rest.push_back(f);
  }

  std::string p_out = (rule.normalized ? "ρ_" : "p_") +
                      std::to_string(rule.output_edge);
  std::string sentence =
      "The output of the network is based on rule that the probability " +
      p_out + " of " + out_fc.display_name + " relationship";

  bool top_symbol_rule = rest.size() == 1 && rest[0].is(ExprKind::FnSymbol) &&
                         rest[0].name() == rule.output_fn;
  std::vector<std::string> clauses;
  if (!top_symbol_rule && !rest.empty()) {
    Expr body = rest[0];
    for (std::size_t i = 1; i < rest.size(); ++i)
      body = Expr::mul(body, rest[i]);
    detail::clause_walk(body, reg, {}, clauses);
  }

  if (!clauses.empty()) {
    sentence += " between ";
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (i) sentence += ", ";
      if (i + 1 == clauses.size() && clauses.size() > 1) sentence += "and ";
      sentence += clauses[i];
    }
  }
  sentence += ", is true.";
  return sentence;
}

}  // namespace frx
