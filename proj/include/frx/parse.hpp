#pragma once

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "frx/expr.hpp"

namespace frx {

// Recursive-descent parser for the expression language:
//
//   expr   := term (("+" | "-" | "+-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := unary ("^" factor)?          (right-associative)
//   unary  := "-" unary | atom
//   atom   := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//
// "+-" is one token when the two characters are adjacent. Recognized call
// names are sin, cos, sqrt, exp (all unary). Other identifiers become leaves:
// p_<digits> and rho_<digits> are probability references, identifiers that
// start with an uppercase letter are function symbols, anything else is a
// variable. Unary minus binds looser than "^", so -x^2 parses as (-x)^2.

namespace detail {

enum class Tok {
  Number, Ident, Plus, Minus, PlusMinus, Star, Slash, Caret,
  LParen, RParen, Comma, End,
};

struct Token {
  Tok type = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return current_; }
  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') { ++line_; col_ = 0; }
      ++pos_;
      ++col_;
    }
    current_ = Token{};
    current_.line = line_;
    current_.column = col_;
    if (pos_ >= src_.size()) { current_.type = Tok::End; return; }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) { lex_number(); return; }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      lex_ident();
      return;
    }
    switch (c) {
      case '+':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
          current_.type = Tok::PlusMinus;
          current_.text = "+-";
          consume(2);
          return;
        }
        one(Tok::Plus);
        return;
      case '-': one(Tok::Minus); return;
      case '*': one(Tok::Star); return;
      case '/': one(Tok::Slash); return;
      case '^': one(Tok::Caret); return;
      case '(': one(Tok::LParen); return;
      case ')': one(Tok::RParen); return;
      case ',': one(Tok::Comma); return;
      default:
        throw ParseError(std::string("unknown operator '") + c + "'", line_,
                         col_);
    }
  }

  void one(Tok t) {
    current_.type = t;
    current_.text = src_[pos_];
    consume(1);
  }

  void consume(std::size_t n) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      consume(1);
    if (pos_ < src_.size() && src_[pos_] == '.') {
      consume(1);
      if (pos_ >= src_.size() ||
          !std::isdigit(static_cast<unsigned char>(src_[pos_])))
        throw ParseError("expected digits after decimal point", line_, col_);
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        consume(1);
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      int mark_col = col_;
      consume(1);
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        consume(1);
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          consume(1);
      } else {
        // Not an exponent after all; "2e" is the number 2 followed by an
        // identifier, which the parser will reject with a clearer message.
        pos_ = mark;
        col_ = mark_col;
      }
    }
    current_.type = Tok::Number;
    current_.text = std::string(src_.substr(start, pos_ - start));
    double v = 0.0;
    auto res = std::from_chars(current_.text.data(),
                               current_.text.data() + current_.text.size(), v);
    if (res.ec != std::errc())
      throw ParseError("malformed number '" + current_.text + "'",
                       current_.line, current_.column);
    current_.number = v;
  }

  void lex_ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      consume(1);
    current_.type = Tok::Ident;
    current_.text = std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token current_;
};

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// p_<digits> / rho_<digits> -> probability reference; leading uppercase ->
// function symbol; everything else -> variable.
inline Expr classify_ident(const std::string& name) {
  auto prob = [&](std::string_view prefix, bool normalized) -> Expr {
    if (name.size() > prefix.size() &&
        std::string_view(name).substr(0, prefix.size()) == prefix &&
        all_digits(std::string_view(name).substr(prefix.size()))) {
      int id = 0;
      auto digits = std::string_view(name).substr(prefix.size());
      auto res = std::from_chars(digits.data(), digits.data() + digits.size(), id);
      if (res.ec == std::errc()) return Expr::prob_ref(id, normalized);
    }
    return Expr{};
  };
  if (Expr e = prob("p_", false)) return e;
  if (Expr e = prob("rho_", true)) return e;
  if (std::isupper(static_cast<unsigned char>(name[0])))
    return Expr::fn_symbol(name);
  return Expr::variable(name);
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Expr parse() {
    Expr e = expr();
    const Token& t = lex_.peek();
    if (t.type != Tok::End)
      throw ParseError("unexpected token '" + t.text + "'", t.line, t.column);
    return e;
  }

 private:
  Expr expr() {
    Expr lhs = term();
    for (;;) {
      switch (lex_.peek().type) {
        case Tok::Plus:
          lex_.take();
          lhs = Expr::add(std::move(lhs), term());
          break;
        case Tok::Minus:
          lex_.take();
          lhs = Expr::sub(std::move(lhs), term());
          break;
        case Tok::PlusMinus:
          lex_.take();
          lhs = Expr::plus_minus(std::move(lhs), term());
          break;
        default:
          return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      switch (lex_.peek().type) {
        case Tok::Star:
          lex_.take();
          lhs = Expr::mul(std::move(lhs), factor());
          break;
        case Tok::Slash:
          lex_.take();
          lhs = Expr::div(std::move(lhs), factor());
          break;
        default:
          return lhs;
      }
    }
  }

  Expr factor() {
    Expr base = unary();
    if (lex_.peek().type == Tok::Caret) {
      lex_.take();
      return Expr::pow(std::move(base), factor());
    }
    return base;
  }

  Expr unary() {
    if (lex_.peek().type == Tok::Minus) {
      Token minus = lex_.take();
      Expr operand = unary();
      if (operand.is(ExprKind::Constant))
        return Expr::number(-operand.number_value());
      return Expr::neg(std::move(operand));
    }
    return atom();
  }

  Expr atom() {
    Token t = lex_.take();
    switch (t.type) {
      case Tok::Number:
        return Expr::number(t.number);
      case Tok::LParen: {
        Expr e = expr();
        expect(Tok::RParen, ")");
        return e;
      }
      case Tok::Ident: {
        if (lex_.peek().type == Tok::LParen) return call(t);
        return classify_ident(t.text);
      }
      case Tok::End:
        throw ParseError("unexpected end of input", t.line, t.column);
      default:
        throw ParseError("unexpected token '" + t.text + "'", t.line,
                         t.column);
    }
  }

  Expr call(const Token& name) {
    lex_.take();  // '('
    std::vector<Expr> args;
    args.push_back(expr());
    while (lex_.peek().type == Tok::Comma) {
      lex_.take();
      args.push_back(expr());
    }
    expect(Tok::RParen, ")");
    ExprKind k;
    if (name.text == "sin") k = ExprKind::Sin;
    else if (name.text == "cos") k = ExprKind::Cos;
    else if (name.text == "sqrt") k = ExprKind::Sqrt;
    else if (name.text == "exp") k = ExprKind::Exp;
    else
      throw ParseError("unknown function '" + name.text + "'", name.line,
                       name.column);
    if (args.size() != 1)
      throw ParseError("function '" + name.text + "' expects 1 argument, got " +
                           std::to_string(args.size()),
                       name.line, name.column);
    return Expr::unary(k, std::move(args[0]));
  }

  void expect(Tok type, const char* what) {
    const Token& t = lex_.peek();
    if (t.type != type)
      throw ParseError(std::string("expected '") + what + "'", t.line,
                       t.column);
    lex_.take();
  }

  Lexer lex_;
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) {
  return detail::Parser(text).parse();
}

}  // namespace frx
