#include "plasmasym/lie/lie.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>

#include "plasmasym/error.hpp"
#include "plasmasym/io.hpp"

namespace plasmasym::lie {

using expr::SymbolKind;

namespace {

bool is_jet(const Symbol& s) { return s.kind == SymbolKind::jet; }
bool is_unknown(const Symbol& s) { return s.kind == SymbolKind::unknown; }

std::string eq_label(int i) { return "equation " + std::to_string(i + 1); }

}  // namespace

PdeSystem make_system(Context ctx, std::vector<Expr> equations, std::vector<Symbol> leading) {
  if (equations.empty()) throw ValidationError("PDE system has no equations");
  if (leading.size() != equations.size()) {
    throw ValidationError("solve_for lists " + std::to_string(leading.size()) + " jets for " +
                          std::to_string(equations.size()) + " equations");
  }
  if (!ctx.unknowns.empty()) throw ValidationError("PDE system may not declare unknowns");

  PdeSystem sys;
  sys.ctx = std::move(ctx);
  const std::set<Symbol> leading_set(leading.begin(), leading.end());
  if (leading_set.size() != leading.size()) throw ValidationError("leading jets must be distinct");

  for (std::size_t i = 0; i < equations.size(); ++i) {
    const int ii = static_cast<int>(i);
    const Symbol& v = leading[i];
    if (!is_jet(v) || v.deriv.size() != 1) {
      throw ValidationError("solve_for entry " + std::to_string(ii + 1) + " is not a first-order jet");
    }
    if (contains(equations[i], [](const Symbol& s) { return is_jet(s) && s.deriv.size() > 1; })) {
      throw ValidationError(eq_label(ii) + " is not first order");
    }
    const auto split = collect_coefficients(equations[i], {v});
    Expr pivot;
    Expr rest;
    for (const auto& [mono, coeff] : split) {
      if (mono.empty()) {
        rest = coeff;
      } else if (mono.size() == 1 && mono.front().second == 1) {
        pivot = coeff;
      } else {
        throw ValidationError(eq_label(ii) + " is nonlinear in its leading jet " +
                              sys.ctx.name_of(v));
      }
    }
    if (pivot.is_zero()) {
      throw ValidationError(eq_label(ii) + " does not contain its leading jet " + sys.ctx.name_of(v));
    }
    const auto term = pivot.as_single_term();
    if (!term) {
      throw ValidationError(eq_label(ii) + ": pivot " + to_string(pivot, sys.ctx) +
                            " of " + sys.ctx.name_of(v) + " must be a single term");
    }
    if (!term->first.empty()) {
      const std::string a = to_string(term->first, sys.ctx) + " != 0";
      if (std::find(sys.assumptions.begin(), sys.assumptions.end(), a) == sys.assumptions.end()) {
        sys.assumptions.push_back(a);
      }
    }
    sys.solved_form[v] = -divide(rest, pivot);
  }

  // Eliminate leading jets from right-hand sides; a chain is at most l long.
  auto has_leading = [&](const Expr& e) {
    return contains(e, [&](const Symbol& s) { return leading_set.contains(s); });
  };
  for (std::size_t pass = 0;; ++pass) {
    bool dirty = false;
    for (auto& [v, rhs] : sys.solved_form) {
      if (has_leading(rhs)) {
        rhs = substitute(rhs, sys.solved_form);
        dirty = true;
      }
    }
    if (!dirty) break;
    if (pass > equations.size()) throw ValidationError("solved form is cyclic in its leading jets");
  }

  for (std::size_t i = 0; i < equations.size(); ++i) {
    if (!substitute(equations[i], sys.solved_form).is_zero()) {
      throw ValidationError("solved form does not annihilate " + eq_label(static_cast<int>(i)));
    }
  }
  sys.equations = std::move(equations);
  sys.leading = std::move(leading);
  return sys;
}

PdeSystem system_from_program(const expr::Program& program) {
  PdeSystem sys = make_system(program.ctx, program.equations, program.solve_for);
  sys.expected_count = program.expect_count;
  return sys;
}

PdeSystem load_system(const std::filesystem::path& path) {
  return system_from_program(expr::parse_program(read_text_file(path)));
}

std::map<Symbol, Expr> prolong_coefficients(const Context& ctx, const std::vector<Expr>& xi,
                                            const std::vector<Expr>& eta) {
  if (static_cast<int>(xi.size()) != ctx.n() || static_cast<int>(eta.size()) != ctx.m()) {
    throw ValidationError("prolongation needs one xi per independent and one eta per dependent");
  }
  std::vector<std::vector<Expr>> dxi(xi.size());  // dxi[j][i] = D_i xi^j
  for (std::size_t j = 0; j < xi.size(); ++j) {
    for (int i = 0; i < ctx.n(); ++i) dxi[j].push_back(total_derivative(xi[j], i, ctx));
  }
  std::map<Symbol, Expr> out;
  for (int k = 0; k < ctx.m(); ++k) {
    for (int i = 0; i < ctx.n(); ++i) {
      Expr c = total_derivative(eta[static_cast<std::size_t>(k)], i, ctx);
      for (int j = 0; j < ctx.n(); ++j) c -= Expr(expr::jet(k, {j})) * dxi[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      out.emplace(expr::jet(k, {i}), std::move(c));
    }
  }
  return out;
}

VectorFieldAnsatz make_ansatz(const PdeSystem& system) {
  VectorFieldAnsatz a;
  a.ctx = system.ctx;
  for (const auto& x : system.ctx.independents) a.xi.emplace_back(a.ctx.add_unknown("xi_" + x));
  for (const auto& u : system.ctx.dependents) a.eta.emplace_back(a.ctx.add_unknown("eta_" + u));
  a.prolonged = prolong_coefficients(a.ctx, a.xi, a.eta);
  return a;
}

namespace {

// Split pr X(E_a), restricted to the solution manifold, by free-jet monomials.
std::vector<DeterminingEquation> split_one(const PdeSystem& sys, const VectorFieldAnsatz& a,
                                           int index, const std::set<Symbol>& basis) {
  const Expr& e = sys.equations[static_cast<std::size_t>(index)];
  Expr prx;
  for (int i = 0; i < sys.n(); ++i) {
    prx += a.xi[static_cast<std::size_t>(i)] * partial(e, expr::independent(i), a.ctx);
  }
  for (int k = 0; k < sys.m(); ++k) {
    prx += a.eta[static_cast<std::size_t>(k)] * partial(e, expr::dependent(k), a.ctx);
  }
  for (const auto& [j, coeff] : a.prolonged) prx += coeff * partial(e, j, a.ctx);
  prx = substitute(prx, sys.solved_form);

  std::vector<DeterminingEquation> out;
  for (auto& [mono, coeff] : collect_coefficients(prx, basis)) {
    if (!coeff.is_zero()) out.push_back({coeff, index, mono});
  }
  return out;
}

Expr scale_to_monic(const Expr& e) {
  const expr::Rational lead = e.terms().begin()->second;
  return e * Expr(expr::Rational(1) / lead);
}

}  // namespace

DeterminingSystem build_determining_system(const PdeSystem& system, Dedupe mode) {
  const VectorFieldAnsatz a = make_ansatz(system);
  std::set<Symbol> basis;
  for (const Symbol& j : system.ctx.first_order_jets()) {
    if (!system.solved_form.contains(j)) basis.insert(j);
  }

  std::vector<std::future<std::vector<DeterminingEquation>>> parts;
  for (int i = 0; i < system.l(); ++i) {
    parts.push_back(std::async(std::launch::async, split_one, std::cref(system), std::cref(a), i,
                               std::cref(basis)));
  }

  DeterminingSystem det;
  det.ctx = a.ctx;
  det.assumptions = system.assumptions;
  det.expected_count = system.expected_count;
  std::set<Expr> seen;
  for (auto& part : parts) {
    for (DeterminingEquation& d : part.get()) {
      ++det.raw_count;
      const Expr key = mode == Dedupe::exact ? d.equation : scale_to_monic(d.equation);
      if (seen.insert(key).second) det.equations.push_back(std::move(d));
    }
  }
  return det;
}

std::string format_listing(const DeterminingSystem& det) {
  std::ostringstream out;
  out << "# count=" << det.count() << " assumptions=";
  for (std::size_t i = 0; i < det.assumptions.size(); ++i) {
    out << (i ? "," : "") << det.assumptions[i];
  }
  out << "\n";
  for (const auto& d : det.equations) {
    out << "eq " << to_string(d.equation, det.ctx) << " = 0;  # src=" << d.source + 1
        << " jet=" << (d.jet_monomial.empty() ? "1" : to_string(d.jet_monomial, det.ctx)) << "\n";
  }
  return out.str();
}

CandidateGenerator parse_generator(std::string_view text, const PdeSystem& system) {
  const expr::Program p = expr::parse_program(text, system.ctx);
  if (!p.equations.empty() || !p.solve_for.empty()) {
    throw ValidationError("generator file may only declare parameters and xi/eta components");
  }
  if (p.ctx.n() != system.n() || p.ctx.m() != system.m()) {
    throw ValidationError("generator file may not declare new variables");
  }
  CandidateGenerator c;
  c.ctx = p.ctx;
  c.xi.assign(static_cast<std::size_t>(system.n()), Expr());
  c.eta.assign(static_cast<std::size_t>(system.m()), Expr());
  for (const auto& comp : p.components) {
    if (contains(comp.value, [](const Symbol& s) { return is_jet(s) || is_unknown(s); })) {
      throw ValidationError("generator components may depend only on variables and parameters");
    }
    (comp.is_xi ? c.xi : c.eta)[static_cast<std::size_t>(comp.index)] = comp.value;
  }
  return c;
}

CandidateGenerator load_generator(const std::filesystem::path& path, const PdeSystem& system) {
  return parse_generator(read_text_file(path), system);
}

std::vector<Expr> verify_generator(const PdeSystem& system, const DeterminingSystem& det,
                                   const CandidateGenerator& cand) {
  const int n = system.n();
  if (static_cast<int>(cand.xi.size()) != n || static_cast<int>(cand.eta.size()) != system.m()) {
    throw ValidationError("candidate has the wrong number of components");
  }
  if (cand.ctx.independents != system.ctx.independents ||
      cand.ctx.dependents != system.ctx.dependents) {
    throw ValidationError("candidate is not expressed over the system variables");
  }
  for (const auto* comps : {&cand.xi, &cand.eta}) {
    for (const Expr& e : *comps) {
      if (contains(e, [&](const Symbol& s) {
            return is_jet(s) || is_unknown(s) ||
                   (s.kind == SymbolKind::parameter && s.index >= static_cast<int>(cand.ctx.parameters.size()));
          })) {
        throw ValidationError("candidate references undeclared symbols");
      }
    }
  }

  std::map<Symbol, Expr> cache;
  auto replacement = [&](const Symbol& s) -> std::optional<Expr> {
    if (!is_unknown(s)) return std::nullopt;
    if (auto it = cache.find(s); it != cache.end()) return it->second;
    Expr v = s.index < n ? cand.xi[static_cast<std::size_t>(s.index)]
                         : cand.eta[static_cast<std::size_t>(s.index - n)];
    for (int var : s.deriv) v = partial(v, cand.ctx.variable(var), cand.ctx);
    cache.emplace(s, v);
    return v;
  };

  std::vector<Expr> residuals;
  residuals.reserve(det.equations.size());
  for (const auto& d : det.equations) residuals.push_back(substitute(d.equation, replacement));
  return residuals;
}

}  // namespace plasmasym::lie
