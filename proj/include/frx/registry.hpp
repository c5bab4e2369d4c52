#pragma once

#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "frx/parse.hpp"

namespace frx {

// A named node function: a symbolic body over named parameters, where each
// parameter is fed by one weighted incoming edge.
struct ComprehensiveFunction {
  std::string name;          // symbol used in rules; starts uppercase
  std::string display_name;  // phrase used by the informal renderer
  std::vector<std::string> params;
  Expr body;

  int arity() const { return static_cast<int>(params.size()); }
};

// Body with parameters replaced by the given argument expressions.
inline Expr instantiate(const ComprehensiveFunction& fc,
                        const std::vector<Expr>& args) {
  if (static_cast<int>(args.size()) != fc.arity())
    throw ValidationError("function '" + fc.name + "' expects " +
                          std::to_string(fc.arity()) + " arguments, got " +
                          std::to_string(args.size()));
  std::map<std::string, Expr> m;
  for (std::size_t i = 0; i < args.size(); ++i) m[fc.params[i]] = args[i];
  return substitute(fc.body, m);
}

namespace detail {

// classify_ident from the parser, but rejecting strings that are not a
// single well-formed identifier.
inline Expr classify_ident_checked(const std::string& s) {
  if (s.empty()) throw ValidationError("empty identifier");
  bool ok = std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_';
  for (char c : s)
    ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (!ok) throw ValidationError("'" + s + "' is not a valid identifier");
  return classify_ident(s);
}

inline bool is_weight_name(const std::string& s) {
  if (s.size() < 3 || s[0] != 'w' || s[1] != '_') return false;
  return all_digits(std::string_view(s).substr(2));
}

}  // namespace detail

class Registry {
 public:
  void define(std::string name, std::string display_name,
              std::vector<std::string> params, const std::string& body_src) {
    if (name.empty() || find(name))
      throw ValidationError("function '" + name + "' already defined or empty");
    {
      Expr cls = detail::classify_ident_checked(name);
      if (!cls.is(ExprKind::FnSymbol))
        throw ValidationError("function name '" + name +
                              "' must start with an uppercase letter so it "
                              "reads back as a function symbol");
    }
    if (display_name.empty())
      throw ValidationError("function '" + name + "' needs a display name");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const std::string& p = params[i];
      Expr cls = detail::classify_ident_checked(p);
      if (!cls.is(ExprKind::Variable))
        throw ValidationError("parameter name '" + p + "' of function '" +
                              name +
                              "' is reserved or does not read back as a "
                              "variable");
      if (detail::is_weight_name(p))
        throw ValidationError("parameter name '" + p + "' of function '" +
                              name + "' is reserved for edge weights");
      for (std::size_t j = 0; j < i; ++j)
        if (params[j] == p)
          throw ValidationError("duplicate parameter '" + p +
                                "' in function '" + name + "'");
    }
    Expr body = parse_expression(body_src);
    if (contains_kind(body, ExprKind::FnSymbol))
      throw ValidationError("body of function '" + name +
                            "' may not reference other function symbols");
    if (contains_kind(body, ExprKind::ProbRef))
      throw ValidationError("body of function '" + name +
                            "' may not reference edge probabilities");
    for (const std::string& v : free_variables(body)) {
      bool known = false;
      for (const std::string& p : params) known = known || p == v;
      if (!known)
        throw ValidationError("body of function '" + name +
                              "' references undefined parameter '" + v + "'");
    }
    fns_.push_back({std::move(name), std::move(display_name),
                    std::move(params), std::move(body)});
  }

  const ComprehensiveFunction* find(const std::string& name) const {
    for (const auto& f : fns_)
      if (f.name == name) return &f;
    return nullptr;
  }

  const ComprehensiveFunction& at(const std::string& name) const {
    if (const auto* f = find(name)) return *f;
    throw ValidationError("unknown function '" + name + "'");
  }

  const std::vector<ComprehensiveFunction>& list() const { return fns_; }

 private:
  std::vector<ComprehensiveFunction> fns_;
};

// The four stock functions.
inline Registry builtin_registry() {
  Registry r;
  r.define("V", "cubic volume", {"s"}, "s^3");
  r.define("T", "trigonometry identity", {"a"}, "sin(a)^2 + cos(a)^2");
  r.define("F", "force", {"m", "a"}, "m*a");
  r.define("Q", "quadratic", {"a", "b", "c"},
           "(-b +- sqrt(b^2 - 4*a*c)) / (2*a)");
  return r;
}

// Definition file: one function per line,
//   Name "display name" (p1, p2, ...) = body
// Blank lines and lines starting with '#' are ignored.
inline void load_function_definitions(Registry& reg, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fail = [&](const std::string& msg) -> void {
      throw ValidationError("functions file line " + std::to_string(lineno) +
                            ": " + msg);
    };
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;

    auto skip_ws = [&] {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t'))
        ++pos;
    };
    auto ident = [&]() -> std::string {
      std::size_t start = pos;
      while (pos < line.size() &&
             (std::isalnum(static_cast<unsigned char>(line[pos])) ||
              line[pos] == '_'))
        ++pos;
      if (pos == start) fail("expected an identifier");
      return line.substr(start, pos - start);
    };

    std::string name = ident();
    skip_ws();
    if (pos >= line.size() || line[pos] != '"')
      fail("expected a quoted display name");
    std::size_t close = line.find('"', pos + 1);
    if (close == std::string::npos) fail("unterminated display name");
    std::string display = line.substr(pos + 1, close - pos - 1);
    pos = close + 1;
    skip_ws();
    if (pos >= line.size() || line[pos] != '(') fail("expected '('");
    ++pos;
    std::vector<std::string> params;
    for (;;) {
      skip_ws();
      if (pos < line.size() && line[pos] == ')' && params.empty()) break;
      params.push_back(ident());
      skip_ws();
      if (pos < line.size() && line[pos] == ',') {
        ++pos;
        continue;
      }
      break;
    }
    if (pos >= line.size() || line[pos] != ')') fail("expected ')'");
    ++pos;
    skip_ws();
    if (pos >= line.size() || line[pos] != '=') fail("expected '='");
    ++pos;
    std::string body = line.substr(pos);
    try {
      reg.define(name, display, params, body);
    } catch (const ParseError& e) {
      fail(e.what());
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }
}

inline void load_function_definitions(Registry& reg, const std::string& text) {
  std::istringstream in(text);
  load_function_definitions(reg, in);
}

}  // namespace frx
