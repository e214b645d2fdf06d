#pragma once

#include <stdexcept>
#include <string>

namespace plasmasym {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: undeclared names, malformed files, out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Syntax error with a 1-based line/column position.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, int line, int column)
      : ValidationError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Undefined arithmetic (division by zero, log(0)).
class MathError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or diverged.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace plasmasym
