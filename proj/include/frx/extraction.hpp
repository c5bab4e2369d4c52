#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "frx/network.hpp"
#include "frx/render.hpp"
#include "frx/simplify.hpp"

namespace frx {

// Edge probabilities computed at one reference input. Only node-fed edges
// (and the output connection) carry probabilities; input-fed edges stay
// symbolic weights in rules. Raw values p_e = sigmoid(f_src) * w_e / f_src
// may well fall outside [0,1]; the optional rho table holds their softmax.
struct ProbabilityAssignment {
  Binding reference_input;
  std::map<int, double> p;
  std::optional<std::map<int, double>> rho;
};

inline ProbabilityAssignment probabilities(const Network& net,
                                           const Binding& reference,
                                           double singular_guard = kDivTol) {
  if (!(singular_guard > 0.0))
    throw ValidationError("singular guard must be positive");
  ForwardTrace trace = forward(net, reference);
  ProbabilityAssignment pa;
  pa.reference_input = reference;
  auto one = [&](int id, const std::string& src, double w) {
    double f = trace.pre.at(src);
    if (std::fabs(f) < singular_guard)
      throw SingularityError(
          "edge " + std::to_string(id) + ": source node '" + src +
          "' has near-zero preactivation " + format_double(f) +
          "; its probability is undefined at this reference input");
    pa.p[id] = trace.act.at(src) * w / f;
  };
  for (const Edge& e : net.edges())
    if (e.from_node) one(e.id, e.source, e.weight);
  one(net.output_edge_id(), net.output_node(), net.output_weight());
  return pa;
}

// Softmax over the raw probabilities (max-shifted for stability). The
// result sums to 1 and preserves strict order.
inline ProbabilityAssignment normalize(const ProbabilityAssignment& pa) {
  if (pa.p.empty())
    throw ValidationError("no probabilities to normalize");
  ProbabilityAssignment out = pa;
  double m = pa.p.begin()->second;
  for (const auto& [id, v] : pa.p) m = std::max(m, v);
  double sum = 0.0;
  std::map<int, double> rho;
  for (const auto& [id, v] : pa.p) {
    rho[id] = std::exp(v - m);
    sum += rho[id];
  }
  for (auto& [id, v] : rho) v /= sum;
  out.rho = std::move(rho);
  return out;
}

// A collapse-level rule. Nodes below the level stay opaque function
// symbols; nodes at or above it are substituted bodies. The expression is
// simplified and canonicalized; probability references are normalized
// (rho) when the assignment carries a softmax table.
struct Rule {
  int level = 1;
  Expr expr;
  bool normalized = false;
  bool directed = true;   // only directed networks have extraction semantics
  std::string output_fn;  // function name of the output node
  int output_edge = 0;    // id behind the rule's outermost probability
};

inline Rule extract(const Network& net, int level,
                    const ProbabilityAssignment& pa) {
  if (!net.directed())
    throw ValidationError(
        "undirected networks have no extraction semantics; set directed true");
  if (level < 1 || level > net.depth() + 1)
    throw ValidationError("level " + std::to_string(level) +
                          " out of range 1.." +
                          std::to_string(net.depth() + 1));
  bool normalized = pa.rho.has_value();

  std::map<std::string, Expr> memo;
  auto expand = [&](auto&& self, const std::string& id) -> Expr {
    auto hit = memo.find(id);
    if (hit != memo.end()) return hit->second;
    const NetNode& n = net.node(id);
    Expr result;
    if (n.layer <= level - 1) {
      result = Expr::fn_symbol(n.fc.name);
    } else {
      std::vector<Expr> args;
      for (int eid : n.incoming) {
        const Edge& e = net.edge(eid);
        if (e.from_node)
          args.push_back(Expr::mul(self(self, e.source),
                                   Expr::prob_ref(e.id, normalized)));
        else
          args.push_back(Expr::mul(Expr::variable("w_" + std::to_string(e.id)),
                                   Expr::variable(e.source)));
      }
      result = instantiate(n.fc, args);
    }
    memo[id] = result;
    return result;
  };

  Rule rule;
  rule.level = level;
  rule.normalized = normalized;
  rule.output_fn = net.node(net.output_node()).fc.name;
  rule.output_edge = net.output_edge_id();
  rule.expr = canonicalize(simplify(
      Expr::mul(expand(expand, net.output_node()),
                Expr::prob_ref(net.output_edge_id(), normalized))));
  return rule;
}

// The complete hierarchy: one rule per level, bottom (fully expanded) to
// top (single symbol), all sharing one probability assignment.
struct RuleSet {
  ProbabilityAssignment pa;
  std::vector<Rule> rules;
};

inline RuleSet extract_all(const Network& net,
                           const ProbabilityAssignment& pa) {
  RuleSet rs;
  rs.pa = pa;
  for (int level = 1; level <= net.depth() + 1; ++level)
    rs.rules.push_back(extract(net, level, pa));
  return rs;
}

inline RuleSet extract_all(const Network& net, const Binding& reference) {
  return extract_all(net, probabilities(net, reference));
}

// Numeric value of a rule at an input. Function symbols take the node
// preactivations of a forward pass at that input, w_k variables take the
// edge weights, and probability references take the assignment's raw
// values. With the assignment computed at the same input this reproduces
// the forward output exactly (up to roundoff): f * p = sigmoid(f) * w.
inline double evaluate_rule(const Network& net, const Rule& rule,
                            const ProbabilityAssignment& pa,
                            const Binding& input, double div_tol = kDivTol) {
  if (rule.normalized)
    throw ValidationError(
        "normalized rules are reports; only raw-probability rules "
        "reconstruct the network output");
  ForwardTrace trace = forward(net, input, div_tol);

  Binding b;
  b.vars = input.vars;
  for (const Edge& e : net.edges())
    b.vars["w_" + std::to_string(e.id)] = e.weight;
  b.vars["w_" + std::to_string(net.output_edge_id())] = net.output_weight();
  b.probs = pa.p;

  // Bind each function symbol the rule mentions to its node's preactivation.
  for (const std::string& fn : [&] {
         std::set<std::string> names;
         auto walk = [&](auto&& self, const Expr& e) -> void {
           if (e.is(ExprKind::FnSymbol)) names.insert(e.name());
           for (int c = 0; c < arity_of(e.kind()); ++c)
             self(self, c == 0 ? e.left() : e.right());
         };
         walk(walk, rule.expr);
         return names;
       }()) {
    const NetNode* found = nullptr;
    for (const NetNode& n : net.nodes()) {
      if (n.fc.name != fn) continue;
      if (found)
        throw ValidationError("rule is ambiguous: two nodes compute '" + fn +
                              "'");
      found = &n;
    }
    if (!found)
      throw ValidationError("rule references function '" + fn +
                            "' which no node computes");
    b.fn_values[fn] = trace.pre.at(found->id);
  }

  // Substituted bodies keep their "+-" operators; they must agree on the
  // branch for a single evaluation to be meaningful.
  if (contains_kind(rule.expr, ExprKind::PlusMinus)) {
    std::optional<PmBranch> branch;
    for (const NetNode& n : net.nodes()) {
      if (n.layer <= rule.level - 1) continue;
      if (!contains_kind(n.fc.body, ExprKind::PlusMinus)) continue;
      if (branch && *branch != n.pm)
        throw ValidationError(
            "rule mixes nodes with different '+-' branches; evaluate the "
            "nodes separately");
      branch = n.pm;
    }
    b.pm_branch = branch.value_or(PmBranch::plus);
  }

  EvalOptions opt;
  opt.div_tol = div_tol;
  return evaluate(rule.expr, b, opt);
}

// One textual occurrence of a function symbol inside a rule, counted in
// pre-order (1-based).
struct FnOccurrence {
  std::string fn;
  int ordinal = 1;
};

namespace detail {

// Root-to-leaf path as child indexes; empty optional if the occurrence
// does not exist.
inline bool find_occurrence(const Expr& e, const std::string& fn, int& countdown,
                            std::vector<std::pair<Expr, int>>& path) {
  if (e.is(ExprKind::FnSymbol) && e.name() == fn) {
    if (--countdown == 0) return true;
  }
  for (int c = 0; c < arity_of(e.kind()); ++c) {
    const Expr& child = c == 0 ? e.left() : e.right();
    path.emplace_back(e, c);
    if (find_occurrence(child, fn, countdown, path)) return true;
    path.pop_back();
  }
  return false;
}

inline void collect_prob_factors(const Expr& e, std::vector<Expr>& out) {
  if (e.is(ExprKind::ProbRef)) {
    out.push_back(e);
    return;
  }
  if (e.is(ExprKind::Mul)) {
    collect_prob_factors(e.left(), out);
    collect_prob_factors(e.right(), out);
  }
}

}  // namespace detail

// The probability that one function participates in the rule: the product
// of every probability coefficient attached, at any multiplication on the
// way up, to the subtree holding that occurrence. Climbing stops where the
// occurrence's value stops scaling the term: at a denominator or an
// exponent.
inline double function_probability(const Rule& rule,
                                   const ProbabilityAssignment& pa,
                                   const FnOccurrence& occ) {
  if (occ.ordinal < 1)
    throw ValidationError("occurrence ordinal must be >= 1");
  int countdown = occ.ordinal;
  std::vector<std::pair<Expr, int>> path;
  if (!detail::find_occurrence(rule.expr, occ.fn, countdown, path))
    throw ValidationError("rule has no occurrence " +
                          std::to_string(occ.ordinal) + " of function '" +
                          occ.fn + "'");

  std::vector<Expr> coeffs;
  for (std::size_t i = path.size(); i-- > 0;) {
    const Expr& parent = path[i].first;
    int child_index = path[i].second;
    if (parent.is(ExprKind::Mul)) {
      const Expr& sibling = child_index == 0 ? parent.right() : parent.left();
      detail::collect_prob_factors(sibling, coeffs);
      continue;
    }
    if (parent.is(ExprKind::Div) && child_index == 1) break;
    if (parent.is(ExprKind::Pow) && child_index == 1) break;
  }

  const std::map<int, double>* table = &pa.p;
  if (rule.normalized) {
    if (!pa.rho)
      throw ValidationError(
          "rule uses normalized probabilities but the assignment has none");
    table = &*pa.rho;
  }
  double product = 1.0;
  for (const Expr& c : coeffs) {
    auto it = table->find(c.prob_index());
    if (it == table->end())
      throw ValidationError("assignment lacks a value for edge " +
                            std::to_string(c.prob_index()));
    product *= it->second;
  }
  return product;
}

}  // namespace frx
