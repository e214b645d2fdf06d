#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plasmasym/expr/parser.hpp"
#include "plasmasym/fields/grid.hpp"
#include "plasmasym/state.hpp"

namespace plasmasym::flux {

enum class Geometry { axisymmetric, helical };

std::string_view geometry_name(Geometry g);

/// Uniform 2D lattice over [r0, r1] x [a, b]. The second coordinate is z
/// (axisymmetric) or u = z - gamma*phi (helical). Flat index i*nu + j.
struct Grid2 {
  double r0 = 0.0;
  double r1 = 1.0;
  double a = 0.0;
  double b = 1.0;
  int nr = 9;
  int nu = 9;

  double hr() const { return (r1 - r0) / (nr - 1); }
  double hu() const { return (b - a) / (nu - 1); }
  double r(int i) const { return i == nr - 1 ? r1 : r0 + i * hr(); }
  double u(int j) const { return j == nu - 1 ? b : a + j * hu(); }
  std::size_t size() const { return static_cast<std::size_t>(nr) * static_cast<std::size_t>(nu); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(nu) + static_cast<std::size_t>(j);
  }
  bool on_boundary(int i, int j) const { return i == 0 || j == 0 || i == nr - 1 || j == nu - 1; }
};

struct SolverParams {
  double tol = 1e-10;
  int max_iter = 500;
  double omega = 0.8;
};

/// Flux problem. Profiles are expressions in `psi`; boundary data and the
/// optional extra source are expressions in `r` and the second coordinate
/// (`z` or `u`). The equation solved is
///
///   Op(psi) + NL(r, psi) = S(r, u)
///
/// with, for the axisymmetric case, Op = psi_rr - psi_r/r + psi_zz and
/// NL = J J' + r^2 N'; for the helical case Op = psi_uu/r^2 +
/// (1/r) d_r(r psi_r/(r^2+g^2)) and NL = J J'/(r^2+g^2) + 2 g J/(r^2+g^2)^2 + L'.
struct FluxProblem {
  Geometry geometry = Geometry::axisymmetric;
  double gamma = 0.0;
  Grid2 grid;
  expr::ScalarFunction J = expr::ScalarFunction::constant(0.0);
  expr::ScalarFunction J_prime = expr::ScalarFunction::constant(0.0);
  expr::ScalarFunction N_prime = expr::ScalarFunction::constant(0.0);
  expr::ScalarFunction boundary = expr::ScalarFunction::constant(0.0);
  std::optional<expr::ScalarFunction> source;
  /// Exact solution when the problem is manufactured from one.
  std::optional<expr::ScalarFunction> exact;
  std::optional<double> psi_ref;
  double N_ref = 0.0;
  SolverParams solver;

  /// Name of the second coordinate: "z" or "u".
  std::string_view coord() const { return geometry == Geometry::axisymmetric ? "z" : "u"; }
  /// Throws ValidationError on a malformed domain, resolution or solver setting.
  void validate() const;
  /// Key = value rendering that parse_problem reads back.
  std::string to_text() const;
};

/// Reads `key = value` lines (`#` comments). Keys: geometry, gamma, r_min,
/// r_max, z_min, z_max (or u_min, u_max), resolution, nr, nz (or nu), J,
/// J_prime, N_prime (or L_prime), boundary, source, manufactured, psi_ref,
/// N_ref, tol, max_iter, omega. `manufactured` sets the boundary data and
/// the source from an exact solution.
FluxProblem parse_problem(std::string_view text);
FluxProblem load_problem(const std::filesystem::path& path);

/// Continuous left-hand side Op + NL applied to an exact solution, as a
/// function of (r, u). Derivatives are taken symbolically.
std::function<double(double, double)> apply_operator(const FluxProblem& p, const expr::ScalarFunction& psi);

/// Sets boundary = psi_star and source = Op(psi_star) + NL(psi_star).
void manufacture(FluxProblem& p, const expr::ScalarFunction& psi_star);

struct FluxSolution {
  FluxProblem problem;
  std::vector<double> psi;
  int iterations = 0;
  double final_update = 0.0;
  bool converged = false;
  /// Linf of the discrete equation residual over interior nodes.
  double discrete_residual = 0.0;
  std::vector<std::string> warnings;

  const Grid2& grid() const { return problem.grid; }
  double at(int i, int j) const { return psi[grid().index(i, j)]; }
};

/// Damped Picard iteration around a once-factorized linear operator.
/// Throws ConvergenceError on divergence, MathError on non-finite profile
/// values. Hitting the iteration cap leaves converged = false.
FluxSolution solve_flux(const FluxProblem& problem);

/// Linf distance to the exact solution over all nodes.
double error_vs_exact(const FluxSolution& sol);

/// 2D CSV with header `r,zu,psi` plus `<csv>.problem` holding the problem.
void export_solution(const FluxSolution& sol, const std::filesystem::path& csv);
/// Reads what export_solution wrote.
FluxSolution read_solution(const std::filesystem::path& csv);

/// Cartesian sampling for flux_to_cgl. `n` nodes along x and y; z spacing
/// matches as closely as the z range allows. Nodes closer than `margin`
/// cells to the edge of the flux domain are inactive.
struct CartesianOptions {
  int n = 33;
  int margin = 2;
  /// Minimum physical distance of active nodes from the flux-domain edges,
  /// applied on top of `margin`. Fix it across resolutions so refinement
  /// studies compare one region.
  double inset = 0.0;
  /// z range for the helical extension; defaults to the u range.
  std::optional<double> z_min;
  std::optional<double> z_max;
};

/// Maps a flux solution to a symmetric 3D CGL state. `tau` is an expression
/// in `psi`, `psi_min` and `psi_max` (attained extremes of the solution).
/// Psi of the state is psi / max|psi|. Throws ValidationError if tau >= 1 is
/// attained.
CGLState flux_to_cgl(const FluxSolution& sol, std::string_view tau, const CartesianOptions& opts = {});

}  // namespace plasmasym::flux
