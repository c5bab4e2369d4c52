#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "frx/extraction.hpp"

namespace frx {

// A closed-form expression for the network output in its input variables,
// with every weight and probability frozen to its value at one reference
// input. Probabilities with magnitude at most epsilon are dropped (replaced
// by literal zero), and the dropped edge ids are recorded. The expression
// is exact at the reference input and an approximation elsewhere, because
// the frozen probabilities vary with the input.
struct Equation {
  Expr expr;
  Binding reference_input;
  double epsilon = 0.0;
  std::vector<int> omitted_edges;  // ascending
};

inline Equation generate_equation(const Network& net, const Binding& reference,
                                  double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw ValidationError("epsilon must be a finite nonnegative number");
  ProbabilityAssignment pa = probabilities(net, reference);
  Rule rule = extract(net, 1, pa);

  std::map<std::string, double> weights;
  for (const Edge& e : net.edges())
    weights["w_" + std::to_string(e.id)] = e.weight;
  weights["w_" + std::to_string(net.output_edge_id())] = net.output_weight();

  std::set<int> omitted;
  auto freeze = [&](auto&& self, const Expr& e) -> Expr {
    switch (e.kind()) {
      case ExprKind::ProbRef: {
        double v = pa.p.at(e.prob_index());
        if (std::fabs(v) <= epsilon) {
          omitted.insert(e.prob_index());
          return Expr::number(0.0);
        }
        return Expr::number(v);
      }
      case ExprKind::Variable: {
        auto it = weights.find(e.name());
        if (it != weights.end()) return Expr::number(it->second);
        return e;  // input variable stays symbolic
      }
      default: {
        int n = arity_of(e.kind());
        if (n == 0) return e;
        if (n == 1) return Expr::unary(e.kind(), self(self, e.operand()));
        return Expr::binary(e.kind(), self(self, e.left()),
                            self(self, e.right()));
      }
    }
  };

  // Canonical ordering can bring constants next to each other (for example
  // after a constant is hoisted out of a power base), so alternate the two
  // passes until neither changes anything.
  Expr expr = freeze(freeze, rule.expr);
  for (;;) {
    Expr next = canonicalize(simplify(expr));
    if (structurally_equal(next, expr)) break;
    expr = std::move(next);
  }

  Equation eq;
  eq.expr = std::move(expr);
  eq.reference_input = reference;
  eq.epsilon = epsilon;
  eq.omitted_edges.assign(omitted.begin(), omitted.end());
  return eq;
}

// Text form: a provenance header (reference input, epsilon, omitted edge
// ids) followed by the expression in machine style, re-parseable.
inline std::string render_equation(const Equation& eq) {
  std::string out = "# reference_input:";
  for (const auto& [name, value] : eq.reference_input.vars)
    out += " " + name + "=" + format_double(value);
  out += "\n# epsilon: " + format_double(eq.epsilon);
  out += "\n# omitted_edges:";
  if (eq.omitted_edges.empty()) {
    out += " none";
  } else {
    for (int id : eq.omitted_edges) out += " " + std::to_string(id);
  }
  out += "\n" + render(eq.expr, RenderStyle::machine) + "\n";
  return out;
}

}  // namespace frx
