#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plasmasym/expr/expr.hpp"

namespace plasmasym::expr {

/// Parses one expression against declared names. `diff(u, x[, y...])` maps
/// to a jet symbol (or a tagged unknown derivative). Throws ParseError on
/// syntax errors, undeclared identifiers and malformed derivatives.
Expr parse_expr(std::string_view text, const Context& ctx);

/// A `xi <indep> = <expr>;` or `eta <dep> = <expr>;` statement.
struct ComponentAssignment {
  bool is_xi = true;
  int index = 0;
  Expr value;
};

/// Parsed DSL program:
///
///   indep x, y, z;
///   dep B1, B2, B3, P;
///   param gamma;
///   eq diff(B1,x) + diff(B2,y) + diff(B3,z) = 0;
///   solve_for: diff(B1,x), diff(P,x)
///   expect_count 133;
///   xi x = K1;  eta P = K4;
///
/// `#` starts a comment that runs to end of line.
struct Program {
  Context ctx;
  std::vector<Expr> equations;  ///< lhs - rhs of each `eq`
  std::vector<Symbol> solve_for;
  std::optional<int> expect_count;
  std::vector<ComponentAssignment> components;
};

/// Parses a program. `base` supplies declarations made elsewhere (e.g. the
/// PDE context when reading a generator file); the program may extend it.
Program parse_program(std::string_view text, const Context& base = {});

/// Numeric scalar function compiled from an expression in named variables.
/// Only whitelisted functions are accepted and the constant `pi` is bound.
class ScalarFunction {
 public:
  ScalarFunction() = default;
  ScalarFunction(std::string_view text, std::vector<std::string> variables);

  static ScalarFunction constant(double c);

  double operator()(std::span<const double> args) const;
  double operator()(double a) const;
  double operator()(double a, double b) const;

  const std::string& text() const { return text_; }
  const Expr& expr() const { return expr_; }
  const Context& context() const { return ctx_; }
  /// Symbolic derivative with respect to variable `v`.
  ScalarFunction derivative(int v) const;

 private:
  std::string text_;
  Context ctx_;
  Expr expr_;
};

}  // namespace plasmasym::expr
