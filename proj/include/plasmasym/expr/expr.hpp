#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace plasmasym::expr {

using Rational = boost::multiprecision::cpp_rational;

enum class SymbolKind : std::uint8_t { independent, dependent, jet, unknown, parameter };

/// A variable of the jet space, a free parameter, or an unknown tangent-field
/// component. Names live in the Context; symbols carry only indices.
///
/// For jets, `index` is the parent dependent and `deriv` the sorted
/// independent indices. For unknowns, `deriv` holds sorted indices into the
/// combined variable list (independents first, then dependents).
struct Symbol {
  SymbolKind kind = SymbolKind::independent;
  int index = 0;
  std::vector<int> deriv;

  friend auto operator<=>(const Symbol&, const Symbol&) = default;
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

Symbol independent(int i);
Symbol dependent(int k);
Symbol jet(int k, std::vector<int> indices);
Symbol parameter(int p);
Symbol unknown(int u, std::vector<int> deriv = {});

/// Opaque single-argument functions. `inv` is the reciprocal of a
/// non-monomial expression.
enum class Func : std::uint8_t { sin, cos, tan, exp, log, sqrt, tanh, inv };

std::string_view func_name(Func f);
std::optional<Func> func_from_name(std::string_view name);

class Expr;
struct FuncApp;

/// Atom of a monomial: a symbol or an opaque function application.
class Atom {
 public:
  Atom(Symbol s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  Atom(Func f, Expr arg);

  bool is_symbol() const { return std::holds_alternative<Symbol>(v_); }
  const Symbol& symbol() const { return std::get<Symbol>(v_); }
  const FuncApp& app() const { return *std::get<std::shared_ptr<const FuncApp>>(v_); }

  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b);
  friend bool operator==(const Atom& a, const Atom& b) { return (a <=> b) == 0; }

 private:
  std::variant<Symbol, std::shared_ptr<const FuncApp>> v_;
};

/// Sorted (atom, exponent) list; exponents are nonzero integers.
using Monomial = std::vector<std::pair<Atom, int>>;

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Fully expanded Laurent polynomial with exact rational coefficients.
/// Every constructor and operation returns normal form, so structural
/// equality is semantic equality for this class of expressions.
class Expr {
 public:
  using Terms = std::map<Monomial, Rational, MonomialLess>;

  Expr() = default;
  Expr(int c);        // NOLINT(google-explicit-constructor)
  Expr(Rational c);   // NOLINT(google-explicit-constructor)
  Expr(Symbol s);     // NOLINT(google-explicit-constructor)
  Expr(Atom a);       // NOLINT(google-explicit-constructor)

  static Expr from_terms(Terms terms);
  static Expr monomial(Monomial m, Rational c = 1);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::optional<Rational> as_constant() const;
  /// Single term c*m, if the expression has exactly one term.
  std::optional<std::pair<Monomial, Rational>> as_single_term() const;

  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(const Expr& o);

  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

  friend std::strong_ordering operator<=>(const Expr& a, const Expr& b);
  friend bool operator==(const Expr& a, const Expr& b);

 private:
  Terms terms_;
};

struct FuncApp {
  Func f;
  Expr arg;
};

/// Integer power. Negative exponents of single-term expressions stay in
/// Laurent form; anything else becomes powers of `inv(base)`.
Expr pow(const Expr& base, int n);
/// Division; same rule as negative powers.
Expr divide(const Expr& num, const Expr& den);
Expr apply(Func f, const Expr& arg);

/// Declared variables of a problem. Unknown tangent components index the
/// combined list (independents, then dependents) for their derivative tags.
class Context {
 public:
  std::vector<std::string> independents;
  std::vector<std::string> dependents;
  std::vector<std::string> parameters;
  std::vector<std::string> unknowns;

  int n() const { return static_cast<int>(independents.size()); }
  int m() const { return static_cast<int>(dependents.size()); }

  /// Symbol of a declared plain name (not a jet); nullopt if undeclared.
  std::optional<Symbol> lookup(std::string_view name) const;
  bool declared(std::string_view name) const { return lookup(name).has_value(); }

  /// Adds a parameter if absent; returns its symbol.
  Symbol add_parameter(const std::string& name);
  Symbol add_unknown(const std::string& name);

  /// Combined-variable symbol (independent for v < n, else dependent).
  Symbol variable(int v) const;
  std::string name_of(const Symbol& s) const;
  /// Every first-order jet, dependent-major.
  std::vector<Symbol> first_order_jets() const;
};

std::string to_string(const Expr& e, const Context& ctx);
std::string to_string(const Monomial& m, const Context& ctx);

/// Partial derivative with respect to an independent, dependent, jet or
/// parameter symbol. Unknown atoms depend on all combined variables and
/// differentiate into tagged atoms; they do not depend on jets.
Expr partial(const Expr& e, const Symbol& var, const Context& ctx);

/// Total derivative D_i on the jet space.
Expr total_derivative(const Expr& e, int i, const Context& ctx);

/// Simultaneous substitution of symbols. `lookup` returns the replacement
/// for a symbol or nullopt to keep it.
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Symbol&)>& lookup);
Expr substitute(const Expr& e, const std::map<Symbol, Expr>& subs);

/// Split `e` into coefficients of monomials in `basis`. The empty monomial
/// keys the basis-free part. Throws if a basis symbol appears inside a
/// function argument or with a negative exponent.
std::map<Monomial, Expr, MonomialLess> collect_coefficients(const Expr& e,
                                                            const std::set<Symbol>& basis);

/// True if any symbol in `e` (including inside function arguments)
/// satisfies `pred`.
bool contains(const Expr& e, const std::function<bool(const Symbol&)>& pred);
/// Total degree of `e` in the symbols selected by `pred` (max over terms).
int degree(const Expr& e, const std::function<bool(const Symbol&)>& pred);

/// Numeric evaluation; `value` supplies every symbol that occurs.
double evaluate(const Expr& e, const std::function<double(const Symbol&)>& value);

}  // namespace plasmasym::expr
