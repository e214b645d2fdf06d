#include "plasmasym/expr/parser.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "plasmasym/error.hpp"

namespace plasmasym::expr {

namespace {

enum class Tok { ident, number, op, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    std::size_t j = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      t.kind = Tok::number;
    } else if (std::string_view("+-*/^(),;=:").find(c) != std::string_view::npos) {
      j = i + 1;
      t.kind = Tok::op;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    t.text = std::string(src.substr(i, j - i));
    advance(j - i);
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

Rational parse_number(const Token& t) {
  const std::string& s = t.text;
  std::string digits;
  int scale = 0;
  bool seen_dot = false;
  std::size_t i = 0;
  for (; i < s.size() && s[i] != 'e' && s[i] != 'E'; ++i) {
    if (s[i] == '.') {
      if (seen_dot) throw ParseError("malformed number '" + s + "'", t.line, t.column);
      seen_dot = true;
    } else {
      digits += s[i];
      if (seen_dot) --scale;
    }
  }
  if (i < s.size()) scale += std::stoi(s.substr(i + 1));
  if (digits.empty()) throw ParseError("malformed number '" + s + "'", t.line, t.column);
  // cpp_int reads a leading zero as an octal prefix
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  Rational value{boost::multiprecision::cpp_int(digits)};
  boost::multiprecision::cpp_int ten_pow = 1;
  for (int k = 0; k < std::abs(scale); ++k) ten_pow *= 10;
  return scale >= 0 ? value * Rational(ten_pow) : value / Rational(ten_pow);
}

class Parser {
 public:
  Parser(std::string_view text, Context ctx) : toks_(tokenize(text)), ctx_(std::move(ctx)) {}

  Expr parse_single() {
    Expr e = expression();
    if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "' after expression");
    return e;
  }

  Program program() {
    Program p;
    while (peek().kind != Tok::end) {
      const Token& kw = peek();
      if (kw.kind != Tok::ident) fail("expected a statement keyword");
      const std::string word = kw.text;
      if (word == "indep" || word == "dep" || word == "param" || word == "unknown") {
        next();
        declare(word);
      } else if (word == "eq") {
        next();
        Expr lhs = expression();
        expect("=");
        Expr rhs = expression();
        expect(";");
        p.equations.push_back(lhs - rhs);
      } else if (word == "solve_for") {
        next();
        expect(":");
        solve_for(p);
      } else if (word == "expect_count") {
        next();
        const Token& t = next();
        if (t.kind != Tok::number) fail("expect_count needs an integer");
        p.expect_count = std::stoi(t.text);
        accept(";");
      } else if (word == "xi" || word == "eta") {
        next();
        const Token& name = next();
        auto sym = ctx_.lookup(name.text);
        const auto wanted = word == "xi" ? SymbolKind::independent : SymbolKind::dependent;
        if (name.kind != Tok::ident || !sym || sym->kind != wanted) {
          fail_at(name, "'" + name.text + "' is not a declared " +
                            (word == "xi" ? "independent" : "dependent") + " variable");
        }
        expect("=");
        Expr value = expression();
        expect(";");
        p.components.push_back({word == "xi", sym->index, std::move(value)});
      } else {
        fail("unknown statement '" + word + "'");
      }
    }
    p.ctx = ctx_;
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (t.kind != Tok::end) ++pos_;
    return t;
  }
  bool is_op(std::string_view s) const { return peek().kind == Tok::op && peek().text == s; }
  bool accept(std::string_view s) {
    if (!is_op(s)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view s) {
    if (!accept(s)) {
      fail("expected '" + std::string(s) + "' but found '" +
           (peek().kind == Tok::end ? std::string("end of input") : peek().text) + "'");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.line, t.column);
  }

  void declare(const std::string& kind) {
    do {
      const Token& t = next();
      if (t.kind != Tok::ident) fail_at(t, "expected a name in '" + kind + "' declaration");
      if (ctx_.declared(t.text) || func_from_name(t.text) || t.text == "diff") {
        fail_at(t, "'" + t.text + "' is already declared or reserved");
      }
      if (kind == "indep") ctx_.independents.push_back(t.text);
      if (kind == "dep") ctx_.dependents.push_back(t.text);
      if (kind == "param") ctx_.parameters.push_back(t.text);
      if (kind == "unknown") ctx_.unknowns.push_back(t.text);
    } while (accept(","));
    expect(";");
  }

  void solve_for(Program& p) {
    do {
      const Token& start = peek();
      Expr e = primary();
      auto t = e.as_single_term();
      if (!t || t->second != 1 || t->first.size() != 1 || t->first[0].second != 1 ||
          !t->first[0].first.is_symbol() || t->first[0].first.symbol().kind != SymbolKind::jet) {
        fail_at(start, "solve_for entries must be derivatives diff(u, x)");
      }
      p.solve_for.push_back(t->first[0].first.symbol());
    } while (accept(","));
    accept(";");
  }

  Expr expression() {
    Expr e;
    if (accept("-")) {
      e = -term();
    } else {
      accept("+");
      e = term();
    }
    for (;;) {
      if (accept("+")) {
        e += term();
      } else if (accept("-")) {
        e -= term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept("*")) {
        e = e * unary();
      } else if (is_op("/")) {
        const Token op = next();
        Expr d = unary();
        if (d.is_zero()) fail_at(op, "division by zero");
        e = divide(e, d);
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept("-")) return -unary();
    if (accept("+")) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept("^")) return base;
    const Token& at = peek();
    const bool paren = accept("(");
    const bool negative = accept("-");
    if (!negative) accept("+");
    const Token& t = next();
    if (t.kind != Tok::number || t.text.find_first_of(".eE") != std::string::npos) {
      fail_at(t, "exponent must be an integer");
    }
    int n = std::stoi(t.text);
    if (negative) n = -n;
    if (paren) expect(")");
    if (n < 0 && base.is_zero()) fail_at(at, "division by zero");
    return pow(base, n);
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::number) {
      next();
      return parse_number(t);
    }
    if (accept("(")) {
      Expr e = expression();
      expect(")");
      return e;
    }
    if (t.kind != Tok::ident) fail("expected an expression");
    const Token name = next();
    if (name.text == "diff") return derivative(name);
    if (auto f = func_from_name(name.text)) {
      expect("(");
      Expr arg = expression();
      expect(")");
      return apply(*f, arg);
    }
    auto sym = ctx_.lookup(name.text);
    if (!sym) fail_at(name, "undeclared identifier '" + name.text + "'");
    return *sym;
  }

  Expr derivative(const Token& at) {
    expect("(");
    const Token target = next();
    auto sym = ctx_.lookup(target.text);
    if (target.kind != Tok::ident || !sym) fail_at(target, "undeclared identifier '" + target.text + "'");
    if (sym->kind != SymbolKind::dependent && sym->kind != SymbolKind::unknown) {
      fail_at(target, "diff() target must be a dependent variable");
    }
    std::vector<int> indices;
    while (accept(",")) {
      const Token v = next();
      auto var = ctx_.lookup(v.text);
      if (v.kind != Tok::ident || !var) fail_at(v, "undeclared identifier '" + v.text + "'");
      if (var->kind == SymbolKind::independent) {
        indices.push_back(var->index);
      } else if (var->kind == SymbolKind::dependent && sym->kind == SymbolKind::unknown) {
        indices.push_back(ctx_.n() + var->index);
      } else {
        fail_at(v, "malformed derivative: cannot differentiate by '" + v.text + "'");
      }
    }
    expect(")");
    if (indices.empty()) fail_at(at, "diff() needs at least one variable");
    if (sym->kind == SymbolKind::dependent) return jet(sym->index, std::move(indices));
    return unknown(sym->index, std::move(indices));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Context ctx_;
};

}  // namespace

Expr parse_expr(std::string_view text, const Context& ctx) { return Parser(text, ctx).parse_single(); }

Program parse_program(std::string_view text, const Context& base) { return Parser(text, base).program(); }

ScalarFunction::ScalarFunction(std::string_view text, std::vector<std::string> variables)
    : text_(text) {
  ctx_.independents = std::move(variables);
  ctx_.parameters = {"pi"};
  expr_ = parse_expr(text, ctx_);
}

ScalarFunction ScalarFunction::constant(double c) {
  ScalarFunction f;
  f.ctx_.parameters = {"pi"};
  f.expr_ = Expr(Rational(c));
  std::ostringstream os;
  os.precision(17);
  os << c;
  f.text_ = os.str();
  return f;
}

double ScalarFunction::operator()(std::span<const double> args) const {
  return evaluate(expr_, [&](const Symbol& s) -> double {
    if (s.kind == SymbolKind::parameter) return std::numbers::pi;
    if (s.kind == SymbolKind::independent && static_cast<std::size_t>(s.index) < args.size()) {
      return args[static_cast<std::size_t>(s.index)];
    }
    throw ValidationError("function '" + text_ + "' evaluated with too few arguments");
  });
}

double ScalarFunction::operator()(double a) const { return (*this)(std::span<const double>(&a, 1)); }

double ScalarFunction::operator()(double a, double b) const {
  const double args[2] = {a, b};
  return (*this)(std::span<const double>(args, 2));
}

ScalarFunction ScalarFunction::derivative(int v) const {
  ScalarFunction d;
  d.ctx_ = ctx_;
  d.expr_ = partial(expr_, independent(v), ctx_);
  d.text_ = to_string(d.expr_, ctx_);
  return d;
}

}  // namespace plasmasym::expr
