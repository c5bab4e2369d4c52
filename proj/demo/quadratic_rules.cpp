// Walks the whole pipeline on the reference four-node network: forward
// evaluation, edge probabilities, the collapse-level rule hierarchy, the
// worded rule, and the closed-form equation frozen at the reference input.

#include <iostream>

#include "frx/frx.hpp"

int main() {
  frx::Registry reg = frx::builtin_registry();
  frx::Network net = frx::reference_figure1(reg);
  frx::Binding at;
  at.vars["i"] = -2.0;

  frx::ForwardTrace trace = frx::forward(net, at);
  std::cout << "output at i=-2: " << frx::format_double(trace.output)
            << "\n\n";

  frx::ProbabilityAssignment pa = frx::probabilities(net, at);
  std::cout << "edge probabilities:\n";
  for (const auto& [id, p] : pa.p)
    std::cout << "  p_" << id << " = " << frx::format_double(p) << "\n";

  std::cout << "\nrule hierarchy (atomic at the top, fully expanded at the "
               "bottom):\n";
  for (const frx::Rule& r : frx::extract_all(net, pa).rules)
    std::cout << "  r_" << r.level << " = " << frx::render(r.expr) << "\n";

  frx::ProbabilityAssignment rho = frx::normalize(pa);
  frx::Rule r3 = frx::extract(net, 3, rho);
  std::cout << "\nworded rule (level 3, normalized):\n  "
            << frx::render_informal(r3, reg, rho) << "\n";

  std::cout << "\nhow much each function participates (level 3, where V, T, "
               "and F are atomic):\n";
  frx::Rule raw3 = frx::extract(net, 3, pa);
  for (const char* fn : {"V", "T", "F"})
    std::cout << "  first occurrence of " << fn << ": "
              << frx::format_double(
                     frx::function_probability(raw3, pa, {fn, 1}))
              << "\n";

  frx::Equation eq = frx::generate_equation(net, at, 0.0);
  std::cout << "\nclosed form at the reference input:\n"
            << frx::render_equation(eq);
  return 0;
}
