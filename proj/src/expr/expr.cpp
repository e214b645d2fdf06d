#include "plasmasym/expr/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "plasmasym/error.hpp"

namespace plasmasym::expr {

Symbol independent(int i) { return {SymbolKind::independent, i, {}}; }
Symbol dependent(int k) { return {SymbolKind::dependent, k, {}}; }
Symbol parameter(int p) { return {SymbolKind::parameter, p, {}}; }

Symbol jet(int k, std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  return {SymbolKind::jet, k, std::move(indices)};
}

Symbol unknown(int u, std::vector<int> deriv) {
  std::sort(deriv.begin(), deriv.end());
  return {SymbolKind::unknown, u, std::move(deriv)};
}

std::string_view func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::tan: return "tan";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::tanh: return "tanh";
    case Func::inv: return "inv";
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  for (Func f : {Func::sin, Func::cos, Func::tan, Func::exp, Func::log, Func::sqrt, Func::tanh}) {
    if (func_name(f) == name) return f;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ordering

Atom::Atom(Func f, Expr arg)
    : v_(std::make_shared<const FuncApp>(FuncApp{f, std::move(arg)})) {}

std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
  if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
  if (a.is_symbol()) return a.symbol() <=> b.symbol();
  const FuncApp& fa = a.app();
  const FuncApp& fb = b.app();
  if (&fa == &fb) return std::strong_ordering::equal;
  if (fa.f != fb.f) return fa.f <=> fb.f;
  return fa.arg <=> fb.arg;
}

bool MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto c = a[i].first <=> b[i].first;
    if (c != 0) return c < 0;
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

namespace {

std::strong_ordering compare_monomials(const Monomial& a, const Monomial& b) {
  MonomialLess less;
  if (less(a, b)) return std::strong_ordering::less;
  if (less(b, a)) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      out.push_back(*ia++);
    } else if (ia == a.end() || ib->first < ia->first) {
      out.push_back(*ib++);
    } else {
      const int e = ia->second + ib->second;
      if (e != 0) out.emplace_back(ia->first, e);
      ++ia;
      ++ib;
    }
  }
  return out;
}

void accumulate(Expr::Terms& terms, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms.erase(it);
  }
}

}  // namespace

std::strong_ordering operator<=>(const Expr& a, const Expr& b) {
  auto ia = a.terms_.begin();
  auto ib = b.terms_.begin();
  for (; ia != a.terms_.end() && ib != b.terms_.end(); ++ia, ++ib) {
    auto c = compare_monomials(ia->first, ib->first);
    if (c != 0) return c;
    if (ia->second != ib->second) {
      return ia->second < ib->second ? std::strong_ordering::less : std::strong_ordering::greater;
    }
  }
  return a.terms_.size() <=> b.terms_.size();
}

bool operator==(const Expr& a, const Expr& b) { return (a <=> b) == 0; }

// ---------------------------------------------------------------------------
// Construction and arithmetic

Expr::Expr(int c) : Expr(Rational(c)) {}

Expr::Expr(Rational c) {
  if (c != 0) terms_.emplace(Monomial{}, std::move(c));
}

Expr::Expr(Symbol s) { terms_.emplace(Monomial{{Atom(std::move(s)), 1}}, Rational(1)); }

Expr::Expr(Atom a) { terms_.emplace(Monomial{{std::move(a), 1}}, Rational(1)); }

Expr Expr::from_terms(Terms terms) {
  Expr e;
  for (auto& [m, c] : terms) {
    if (c != 0) e.terms_.emplace(m, c);
  }
  return e;
}

Expr Expr::monomial(Monomial m, Rational c) {
  Expr e;
  if (c != 0) e.terms_.emplace(std::move(m), std::move(c));
  return e;
}

std::optional<Rational> Expr::as_constant() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_.begin()->first.empty()) return terms_.begin()->second;
  return std::nullopt;
}

std::optional<std::pair<Monomial, Rational>> Expr::as_single_term() const {
  if (terms_.size() != 1) return std::nullopt;
  return *terms_.begin();
}

Expr& Expr::operator+=(const Expr& o) {
  for (const auto& [m, c] : o.terms_) accumulate(terms_, m, c);
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  for (const auto& [m, c] : o.terms_) accumulate(terms_, m, -c);
  return *this;
}

Expr& Expr::operator*=(const Expr& o) {
  *this = *this * o;
  return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
  Expr out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      accumulate(out.terms_, multiply(ma, mb), ca * cb);
    }
  }
  return out;
}

Expr operator-(const Expr& a) {
  Expr out = a;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

namespace {

Rational rational_pow(const Rational& c, int n) {
  Rational r = 1;
  Rational b = n >= 0 ? c : Rational(1) / c;
  for (int k = std::abs(n); k > 0; --k) r *= b;
  return r;
}

Expr pow_nonneg(Expr base, int n) {
  Expr result = 1;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

}  // namespace

Expr pow(const Expr& base, int n) {
  if (n >= 0) return pow_nonneg(base, n);
  if (base.is_zero()) throw MathError("division by zero");
  if (auto t = base.as_single_term()) {
    Monomial m = t->first;
    for (auto& [atom, e] : m) e *= n;
    return Expr::monomial(std::move(m), rational_pow(t->second, n));
  }
  return pow_nonneg(Expr(Atom(Func::inv, base)), -n);
}

Expr divide(const Expr& num, const Expr& den) { return num * pow(den, -1); }

Expr apply(Func f, const Expr& arg) {
  if (arg.is_zero()) {
    switch (f) {
      case Func::sin:
      case Func::tan:
      case Func::tanh:
      case Func::sqrt: return 0;
      case Func::cos:
      case Func::exp: return 1;
      case Func::log:
      case Func::inv: throw MathError(std::string(func_name(f)) + "(0) is undefined");
    }
  }
  if (f == Func::inv) return pow(arg, -1);
  return Expr(Atom(f, arg));
}

// ---------------------------------------------------------------------------
// Context

std::optional<Symbol> Context::lookup(std::string_view name) const {
  auto find = [&](const std::vector<std::string>& v) -> int {
    auto it = std::find(v.begin(), v.end(), name);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  };
  if (int i = find(independents); i >= 0) return independent(i);
  if (int k = find(dependents); k >= 0) return dependent(k);
  if (int p = find(parameters); p >= 0) return parameter(p);
  if (int u = find(unknowns); u >= 0) return unknown(u);
  return std::nullopt;
}

Symbol Context::add_parameter(const std::string& name) {
  if (auto s = lookup(name)) {
    if (s->kind != SymbolKind::parameter) {
      throw ValidationError("'" + name + "' already declared as a non-parameter");
    }
    return *s;
  }
  parameters.push_back(name);
  return parameter(static_cast<int>(parameters.size()) - 1);
}

Symbol Context::add_unknown(const std::string& name) {
  if (auto s = lookup(name)) {
    if (s->kind != SymbolKind::unknown) {
      throw ValidationError("'" + name + "' already declared");
    }
    return *s;
  }
  unknowns.push_back(name);
  return unknown(static_cast<int>(unknowns.size()) - 1);
}

Symbol Context::variable(int v) const { return v < n() ? independent(v) : dependent(v - n()); }

std::string Context::name_of(const Symbol& s) const {
  auto at = [](const std::vector<std::string>& v, int i) -> std::string {
    if (i < 0 || i >= static_cast<int>(v.size())) return "?" + std::to_string(i);
    return v[static_cast<std::size_t>(i)];
  };
  switch (s.kind) {
    case SymbolKind::independent: return at(independents, s.index);
    case SymbolKind::dependent: return at(dependents, s.index);
    case SymbolKind::parameter: return at(parameters, s.index);
    case SymbolKind::jet: {
      std::string out = "diff(" + at(dependents, s.index);
      for (int i : s.deriv) out += "," + at(independents, i);
      return out + ")";
    }
    case SymbolKind::unknown: {
      if (s.deriv.empty()) return at(unknowns, s.index);
      std::string out = "diff(" + at(unknowns, s.index);
      for (int v : s.deriv) out += "," + name_of(variable(v));
      return out + ")";
    }
  }
  return "?";
}

std::vector<Symbol> Context::first_order_jets() const {
  std::vector<Symbol> out;
  for (int k = 0; k < m(); ++k) {
    for (int i = 0; i < n(); ++i) out.push_back(jet(k, {i}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string rational_string(const Rational& c) {
  std::ostringstream os;
  os << numerator(c);
  if (denominator(c) != 1) os << "/" << denominator(c);
  return os.str();
}

std::string atom_string(const Atom& a, const Context& ctx) {
  if (a.is_symbol()) return ctx.name_of(a.symbol());
  const FuncApp& app = a.app();
  if (app.f == Func::inv) return "(" + to_string(app.arg, ctx) + ")^(-1)";
  return std::string(func_name(app.f)) + "(" + to_string(app.arg, ctx) + ")";
}

std::string factor_string(const Atom& a, int e, const Context& ctx) {
  if (!a.is_symbol() && a.app().f == Func::inv) {
    const std::string base = "(" + to_string(a.app().arg, ctx) + ")";
    return base + "^(" + std::to_string(-e) + ")";
  }
  std::string s = atom_string(a, ctx);
  if (e == 1) return s;
  if (e < 0) return s + "^(" + std::to_string(e) + ")";
  return s + "^" + std::to_string(e);
}

}  // namespace

std::string to_string(const Monomial& m, const Context& ctx) {
  if (m.empty()) return "1";
  std::string out;
  for (const auto& [a, e] : m) {
    if (!out.empty()) out += "*";
    out += factor_string(a, e, ctx);
  }
  return out;
}

std::string to_string(const Expr& e, const Context& ctx) {
  if (e.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : e.terms()) {
    const bool negative = c < 0;
    const Rational mag = negative ? Rational(-c) : c;
    if (first) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    first = false;
    if (m.empty()) {
      out += rational_string(mag);
    } else if (mag == 1) {
      out += to_string(m, ctx);
    } else {
      out += rational_string(mag) + "*" + to_string(m, ctx);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr func_derivative(Func f, const Expr& a) {
  switch (f) {
    case Func::sin: return apply(Func::cos, a);
    case Func::cos: return -apply(Func::sin, a);
    case Func::tan: {
      Expr t = apply(Func::tan, a);
      return Expr(1) + t * t;
    }
    case Func::exp: return apply(Func::exp, a);
    case Func::log: return pow(a, -1);
    case Func::sqrt: return Expr(Rational(1, 2)) * pow(apply(Func::sqrt, a), -1);
    case Func::tanh: {
      Expr t = apply(Func::tanh, a);
      return Expr(1) - t * t;
    }
    case Func::inv: {
      Expr i = Expr(Atom(Func::inv, a));
      return -(i * i);
    }
  }
  return 0;
}

// Product rule over the factors of every term; `atom_derivative` gives
// d(atom) for a single atom.
Expr differentiate(const Expr& e, const std::function<Expr(const Atom&)>& atom_derivative) {
  Expr out;
  for (const auto& [m, c] : e.terms()) {
    for (std::size_t k = 0; k < m.size(); ++k) {
      Expr da = atom_derivative(m[k].first);
      if (da.is_zero()) continue;
      Monomial rest = m;
      const int ex = rest[k].second;
      if (ex == 1) {
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
      } else {
        rest[k].second = ex - 1;
      }
      out += Expr::monomial(std::move(rest), c * ex) * da;
    }
  }
  return out;
}

int combined_index(const Symbol& var, const Context& ctx) {
  return var.kind == SymbolKind::independent ? var.index : ctx.n() + var.index;
}

}  // namespace

Expr partial(const Expr& e, const Symbol& var, const Context& ctx) {
  return differentiate(e, [&](const Atom& a) -> Expr {
    if (!a.is_symbol()) {
      const FuncApp& app = a.app();
      Expr inner = partial(app.arg, var, ctx);
      if (inner.is_zero()) return 0;
      return func_derivative(app.f, app.arg) * inner;
    }
    const Symbol& s = a.symbol();
    if (s == var) return 1;
    if (s.kind == SymbolKind::unknown &&
        (var.kind == SymbolKind::independent || var.kind == SymbolKind::dependent)) {
      std::vector<int> d = s.deriv;
      d.push_back(combined_index(var, ctx));
      return unknown(s.index, std::move(d));
    }
    return 0;
  });
}

Expr total_derivative(const Expr& e, int i, const Context& ctx) {
  return differentiate(e, [&](const Atom& a) -> Expr {
    if (!a.is_symbol()) {
      const FuncApp& app = a.app();
      Expr inner = total_derivative(app.arg, i, ctx);
      if (inner.is_zero()) return 0;
      return func_derivative(app.f, app.arg) * inner;
    }
    const Symbol& s = a.symbol();
    switch (s.kind) {
      case SymbolKind::independent: return s.index == i ? 1 : 0;
      case SymbolKind::dependent: return jet(s.index, {i});
      case SymbolKind::jet: {
        std::vector<int> d = s.deriv;
        d.push_back(i);
        return jet(s.index, std::move(d));
      }
      case SymbolKind::parameter: return 0;
      case SymbolKind::unknown: {
        std::vector<int> dx = s.deriv;
        dx.push_back(i);
        Expr out = unknown(s.index, std::move(dx));
        for (int l = 0; l < ctx.m(); ++l) {
          std::vector<int> du = s.deriv;
          du.push_back(ctx.n() + l);
          out += Expr(unknown(s.index, std::move(du))) * Expr(jet(l, {i}));
        }
        return out;
      }
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// Substitution, splitting, queries

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Symbol&)>& lookup) {
  Expr out;
  for (const auto& [m, c] : e.terms()) {
    Expr term = Expr(c);
    Monomial kept;
    for (const auto& [a, ex] : m) {
      if (a.is_symbol()) {
        if (auto r = lookup(a.symbol())) {
          term = term * pow(*r, ex);
          continue;
        }
        kept.emplace_back(a, ex);
      } else {
        const FuncApp& app = a.app();
        Expr arg = substitute(app.arg, lookup);
        if (arg == app.arg) {
          kept.emplace_back(a, ex);
        } else {
          term = term * pow(apply(app.f, arg), ex);
        }
      }
    }
    out += term * Expr::monomial(std::move(kept));
  }
  return out;
}

Expr substitute(const Expr& e, const std::map<Symbol, Expr>& subs) {
  if (subs.empty()) return e;
  return substitute(e, [&](const Symbol& s) -> std::optional<Expr> {
    auto it = subs.find(s);
    if (it == subs.end()) return std::nullopt;
    return it->second;
  });
}

bool contains(const Expr& e, const std::function<bool(const Symbol&)>& pred) {
  for (const auto& [m, c] : e.terms()) {
    for (const auto& [a, ex] : m) {
      if (a.is_symbol() ? pred(a.symbol()) : contains(a.app().arg, pred)) return true;
    }
  }
  return false;
}

int degree(const Expr& e, const std::function<bool(const Symbol&)>& pred) {
  int best = 0;
  for (const auto& [m, c] : e.terms()) {
    int d = 0;
    for (const auto& [a, ex] : m) {
      if (a.is_symbol() && pred(a.symbol())) d += ex;
    }
    best = std::max(best, d);
  }
  return best;
}

std::map<Monomial, Expr, MonomialLess> collect_coefficients(const Expr& e,
                                                            const std::set<Symbol>& basis) {
  auto in_basis = [&](const Symbol& s) { return basis.contains(s); };
  std::map<Monomial, Expr, MonomialLess> out;
  for (const auto& [m, c] : e.terms()) {
    Monomial key;
    Monomial rest;
    for (const auto& [a, ex] : m) {
      if (a.is_symbol() && in_basis(a.symbol())) {
        if (ex < 0) throw ValidationError("collect_coefficients: negative power of a basis symbol");
        key.emplace_back(a, ex);
      } else {
        if (!a.is_symbol() && contains(a.app().arg, in_basis)) {
          throw ValidationError("collect_coefficients: basis symbol inside a function application");
        }
        rest.emplace_back(a, ex);
      }
    }
    out[key] += Expr::monomial(std::move(rest), c);
  }
  for (auto it = out.begin(); it != out.end();) {
    it = it->second.is_zero() ? out.erase(it) : std::next(it);
  }
  return out;
}

double evaluate(const Expr& e, const std::function<double(const Symbol&)>& value) {
  double sum = 0.0;
  for (const auto& [m, c] : e.terms()) {
    double term = c.convert_to<double>();
    for (const auto& [a, ex] : m) {
      double v = 0.0;
      if (a.is_symbol()) {
        v = value(a.symbol());
      } else {
        const double x = evaluate(a.app().arg, value);
        switch (a.app().f) {
          case Func::sin: v = std::sin(x); break;
          case Func::cos: v = std::cos(x); break;
          case Func::tan: v = std::tan(x); break;
          case Func::exp: v = std::exp(x); break;
          case Func::log: v = std::log(x); break;
          case Func::sqrt: v = std::sqrt(x); break;
          case Func::tanh: v = std::tanh(x); break;
          case Func::inv: v = 1.0 / x; break;
        }
      }
      term *= ex == 1 ? v : std::pow(v, ex);
    }
    sum += term;
  }
  return sum;
}

}  // namespace plasmasym::expr
