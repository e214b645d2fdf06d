#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plasmasym/expr/expr.hpp"
#include "plasmasym/expr/parser.hpp"

namespace plasmasym::lie {

using expr::Context;
using expr::Expr;
using expr::Monomial;
using expr::Symbol;

/// First-order PDE system with a solved form.
///
/// Invariants: every equation is polynomial (Laurent) in first-order jets;
/// `leading[i]` is the jet solved from `equations[i]`; the solved form is
/// free of leading jets and annihilates every equation structurally.
struct PdeSystem {
  Context ctx;
  std::vector<Expr> equations;
  std::vector<Symbol> leading;
  std::map<Symbol, Expr> solved_form;
  /// Nonvanishing pivots assumed while solving (e.g. "B1 != 0").
  std::vector<std::string> assumptions;
  std::optional<int> expected_count;

  int n() const { return ctx.n(); }
  int m() const { return ctx.m(); }
  int l() const { return static_cast<int>(equations.size()); }
};

/// Builds a system, solving equation i for `leading[i]`. Pivots must be
/// single terms; non-constant pivots are recorded as assumptions.
PdeSystem make_system(Context ctx, std::vector<Expr> equations, std::vector<Symbol> leading);
PdeSystem system_from_program(const expr::Program& program);
PdeSystem load_system(const std::filesystem::path& path);

/// Point vector field X = xi^i d/dx^i + eta^k d/du^k with its first
/// prolongation on every first-order jet.
struct VectorFieldAnsatz {
  Context ctx;  ///< system context extended with the unknown components
  std::vector<Expr> xi;
  std::vector<Expr> eta;
  std::map<Symbol, Expr> prolonged;
};

/// eta^(1)k_i = D_i eta^k - sum_j u^k_j D_i xi^j, normalized.
std::map<Symbol, Expr> prolong_coefficients(const Context& ctx, const std::vector<Expr>& xi,
                                            const std::vector<Expr>& eta);

/// Ansatz with opaque unknowns named xi_<indep> and eta_<dep>.
VectorFieldAnsatz make_ansatz(const PdeSystem& system);

struct DeterminingEquation {
  Expr equation;
  int source = 0;        ///< index of the PDE it was split from
  Monomial jet_monomial;  ///< free-jet monomial whose coefficient it is
};

enum class Dedupe {
  exact,            ///< structural equality of normalized coefficients
  scalar_multiple,  ///< additionally fold equations equal up to a constant factor
};

struct DeterminingSystem {
  Context ctx;  ///< includes the unknown components
  std::vector<DeterminingEquation> equations;
  int raw_count = 0;  ///< nonzero coefficients before dedupe
  std::vector<std::string> assumptions;
  std::optional<int> expected_count;

  int count() const { return static_cast<int>(equations.size()); }
};

DeterminingSystem build_determining_system(const PdeSystem& system, Dedupe mode = Dedupe::exact);

/// Plain-text listing: `# count=<N> assumptions=<list>` then one `eq ... = 0;`
/// per line with provenance as a trailing comment.
std::string format_listing(const DeterminingSystem& det);

/// Concrete generator over the system variables and free parameters.
struct CandidateGenerator {
  Context ctx;  ///< system context plus any parameters the generator declares
  std::vector<Expr> xi;
  std::vector<Expr> eta;
};

/// Reads `xi <indep> = ...;` / `eta <dep> = ...;` statements; omitted
/// components are zero. Throws ValidationError on jets or unknowns.
CandidateGenerator parse_generator(std::string_view text, const PdeSystem& system);
CandidateGenerator load_generator(const std::filesystem::path& path, const PdeSystem& system);

/// Substitutes the candidate (and its exact partials) for the unknown atoms
/// in every determining equation; returns normalized residuals in order.
std::vector<Expr> verify_generator(const PdeSystem& system, const DeterminingSystem& det,
                                   const CandidateGenerator& cand);

inline bool all_zero(const std::vector<Expr>& residuals) {
  for (const Expr& r : residuals) {
    if (!r.is_zero()) return false;
  }
  return true;
}

}  // namespace plasmasym::lie
