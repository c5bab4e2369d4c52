#pragma once

#include <random>
#include <string>
#include <vector>

#include "frx/eval.hpp"
#include "frx/expr.hpp"

namespace frxtest {

using frx::Expr;
using frx::ExprKind;

struct GenOptions {
  int max_depth = 5;
  bool fn_symbols = true;
  bool prob_refs = true;
  bool plus_minus = true;
  bool calls = true;
  bool div = true;
  bool general_pow = true;  // if false, exponents are small integer constants
};

inline double random_constant(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  switch (pick(rng)) {
    case 0: return std::uniform_int_distribution<int>(-3, 3)(rng);
    case 1: return 0.0;
    case 2: return 1.0;
    default:
      return std::uniform_real_distribution<double>(-2.5, 2.5)(rng);
  }
}

inline Expr random_leaf(std::mt19937_64& rng, const GenOptions& o) {
  static const char* vars[] = {"x", "y", "z", "a", "b", "c"};
  static const char* fns[] = {"V", "T", "F", "Q", "G2"};
  std::uniform_int_distribution<int> pick(0, 9);
  int p = pick(rng);
  if (p < 4) return Expr::number(random_constant(rng));
  if (p < 8 || (!o.fn_symbols && !o.prob_refs))
    return Expr::variable(vars[rng() % 6]);
  if (p == 8 && o.fn_symbols) return Expr::fn_symbol(fns[rng() % 5]);
  if (o.prob_refs)
    return Expr::prob_ref(1 + static_cast<int>(rng() % 9), rng() % 2 == 0);
  return Expr::variable(vars[rng() % 6]);
}

inline Expr random_expr(std::mt19937_64& rng, const GenOptions& o,
                        int depth = 0) {
  if (depth >= o.max_depth || rng() % 4 == 0) return random_leaf(rng, o);
  std::vector<ExprKind> kinds = {ExprKind::Add, ExprKind::Sub, ExprKind::Mul,
                                 ExprKind::Neg, ExprKind::Pow};
  if (o.div) kinds.push_back(ExprKind::Div);
  if (o.plus_minus) kinds.push_back(ExprKind::PlusMinus);
  if (o.calls) {
    kinds.push_back(ExprKind::Sqrt);
    kinds.push_back(ExprKind::Sin);
    kinds.push_back(ExprKind::Cos);
    kinds.push_back(ExprKind::Exp);
  }
  ExprKind k = kinds[rng() % kinds.size()];
  if (k == ExprKind::Pow) {
    Expr base = random_expr(rng, o, depth + 1);
    if (o.general_pow && rng() % 3 == 0)
      return Expr::pow(std::move(base), random_expr(rng, o, depth + 1));
    return Expr::pow(std::move(base),
                     Expr::number(1 + static_cast<int>(rng() % 3)));
  }
  if (frx::arity_of(k) == 1)
    return Expr::unary(k, random_expr(rng, o, depth + 1));
  return Expr::binary(k, random_expr(rng, o, depth + 1),
                      random_expr(rng, o, depth + 1));
}

// Binds every symbol the generators can emit.
inline frx::Binding random_binding(std::mt19937_64& rng, double lo = -2.0,
                                   double hi = 2.0) {
  std::uniform_real_distribution<double> val(lo, hi);
  frx::Binding b;
  for (const char* v : {"x", "y", "z", "a", "b", "c"}) b.vars[v] = val(rng);
  for (const char* f : {"V", "T", "F", "Q", "G2"}) b.fn_values[f] = val(rng);
  for (int i = 1; i <= 9; ++i) {
    b.probs[i] = val(rng);
    b.rhos[i] = val(rng);
  }
  b.pm_branch = rng() % 2 == 0 ? frx::PmBranch::plus : frx::PmBranch::minus;
  return b;
}

inline bool close_rel(double a, double b, double rel) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= rel * scale;
}

}  // namespace frxtest
