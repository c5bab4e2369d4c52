#pragma once

#include <stdexcept>
#include <string>

namespace frx {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed expression source. Carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Structural problems: bad definitions, bad wiring, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numeric evaluation failures.
class EvalError : public Error {
 public:
  using Error::Error;
};

class UnboundSymbolError : public EvalError {
 public:
  using EvalError::EvalError;
};

class DivisionByZeroError : public EvalError {
 public:
  using EvalError::EvalError;
};

// Real-arithmetic domain violations (sqrt of a negative, non-real powers).
class DomainError : public EvalError {
 public:
  using EvalError::EvalError;
};

// A probability is undefined because an edge's source value is too close
// to zero, or a training sample hit a singular denominator.
class SingularityError : public EvalError {
 public:
  using EvalError::EvalError;
};

// Training produced a non-finite loss.
class DivergenceError : public EvalError {
 public:
  using EvalError::EvalError;
};

}  // namespace frx
