#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include "plasmasym/error.hpp"
#include "plasmasym/fields/io.hpp"
#include "plasmasym/flux/flux.hpp"
#include "plasmasym/io.hpp"

namespace plasmasym::flux {

namespace {

// Five-point stencil of the linear operator at one interior node.
struct Stencil {
  double rm, rp, um, up, c;
};

Stencil stencil(const FluxProblem& p, double r) {
  const double hr = p.grid.hr();
  const double hu = p.grid.hu();
  if (p.geometry == Geometry::axisymmetric) {
    const double d2 = 1.0 / (hr * hr);
    const double d1 = 1.0 / (2.0 * hr * r);
    const double du = 1.0 / (hu * hu);
    return {d2 + d1, d2 - d1, du, du, -2.0 * d2 - 2.0 * du};
  }
  // Conservative form of (1/r) d_r(a psi_r), a = r/(r^2 + g^2).
  const double g2 = p.gamma * p.gamma;
  auto a = [g2](double s) { return s / (s * s + g2); };
  const double rm = a(r - 0.5 * hr) / (r * hr * hr);
  const double rp = a(r + 0.5 * hr) / (r * hr * hr);
  const double du = 1.0 / (r * r * hu * hu);
  return {rm, rp, du, du, -(rm + rp) - 2.0 * du};
}

double nonlinear(const FluxProblem& p, double r, double psi) {
  const double j = p.J(psi);
  const double jp = p.J_prime(psi);
  const double np = p.N_prime(psi);
  double v = 0.0;
  if (p.geometry == Geometry::axisymmetric) {
    v = j * jp + r * r * np;
  } else {
    const double q = r * r + p.gamma * p.gamma;
    v = j * jp / q + 2.0 * p.gamma * j / (q * q) + np;
  }
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite profile value at psi = " << psi << ", r = " << r;
    throw MathError(os.str());
  }
  return v;
}

void check_j_prime(const FluxProblem& p, double lo, double hi, std::vector<std::string>& warnings) {
  if (hi <= lo) {
    lo -= 1.0;
    hi += 1.0;
  }
  for (int k = 0; k < 5; ++k) {
    const double x = lo + (hi - lo) * k / 4.0;
    const double step = 1e-5 * (1.0 + std::abs(x));
    const double fd = (p.J(x + step) - p.J(x - step)) / (2.0 * step);
    const double jp = p.J_prime(x);
    if (std::isfinite(fd) && std::isfinite(jp) && std::abs(fd - jp) > 1e-5 * (1.0 + std::abs(jp))) {
      std::ostringstream os;
      os.precision(6);
      os << "J_prime does not match dJ/dpsi at psi = " << x << " (J_prime = " << jp << ", numeric = " << fd << ")";
      warnings.push_back(os.str());
      return;
    }
  }
}

}  // namespace

FluxSolution solve_flux(const FluxProblem& problem) {
  problem.validate();
  const Grid2& g = problem.grid;
  const int mr = g.nr - 2;
  const int mu = g.nu - 2;
  const auto unknowns = static_cast<Eigen::Index>(mr) * mu;
  auto col = [mu](int i, int j) { return static_cast<Eigen::Index>(i - 1) * mu + (j - 1); };

  FluxSolution sol;
  sol.problem = problem;
  sol.psi.assign(g.size(), 0.0);
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nu; ++j) {
      const double v = problem.boundary(g.r(i), g.u(j));
      if (!std::isfinite(v)) throw MathError("non-finite boundary value at r = " + std::to_string(g.r(i)));
      sol.psi[g.index(i, j)] = v;
    }
  }
  double blo = sol.psi[0];
  double bhi = sol.psi[0];
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nu; ++j) {
      if (!g.on_boundary(i, j)) continue;
      blo = std::min(blo, sol.psi[g.index(i, j)]);
      bhi = std::max(bhi, sol.psi[g.index(i, j)]);
    }
  }
  check_j_prime(problem, blo, bhi, sol.warnings);

  // Source plus the Dirichlet contributions moved to the right-hand side.
  std::function<double(double, double)> S;
  if (problem.source) {
    S = [f = *problem.source](double r, double u) { return f(r, u); };
  } else if (problem.exact) {
    S = apply_operator(problem, *problem.exact);
  }
  std::vector<Stencil> st(static_cast<std::size_t>(g.nr));
  for (int i = 1; i < g.nr - 1; ++i) st[static_cast<std::size_t>(i)] = stencil(problem, g.r(i));

  Eigen::VectorXd fixed(unknowns);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(unknowns) * 5);
  for (int i = 1; i < g.nr - 1; ++i) {
    const Stencil& s = st[static_cast<std::size_t>(i)];
    for (int j = 1; j < g.nu - 1; ++j) {
      const Eigen::Index row = col(i, j);
      double rhs = S ? S(g.r(i), g.u(j)) : 0.0;
      if (!std::isfinite(rhs)) throw MathError("non-finite source at r = " + std::to_string(g.r(i)));
      trips.emplace_back(row, row, s.c);
      const std::pair<std::pair<int, int>, double> nb[4] = {
          {{i - 1, j}, s.rm}, {{i + 1, j}, s.rp}, {{i, j - 1}, s.um}, {{i, j + 1}, s.up}};
      for (const auto& [ij, w] : nb) {
        if (g.on_boundary(ij.first, ij.second)) {
          rhs -= w * sol.psi[g.index(ij.first, ij.second)];
        } else {
          trips.emplace_back(row, col(ij.first, ij.second), w);
        }
      }
      fixed[row] = rhs;
    }
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw ConvergenceError("sparse LU factorization failed: " + lu.lastErrorMessage());

  const double omega = problem.solver.omega;
  std::deque<double> history;
  Eigen::VectorXd rhs(unknowns);
  for (int it = 1; it <= problem.solver.max_iter; ++it) {
    for (int i = 1; i < g.nr - 1; ++i) {
      for (int j = 1; j < g.nu - 1; ++j) {
        rhs[col(i, j)] = fixed[col(i, j)] - nonlinear(problem, g.r(i), sol.psi[g.index(i, j)]);
      }
    }
    const Eigen::VectorXd y = lu.solve(rhs);
    double upd = 0.0;
    for (int i = 1; i < g.nr - 1; ++i) {
      for (int j = 1; j < g.nu - 1; ++j) {
        double& v = sol.psi[g.index(i, j)];
        const double next = v + omega * (y[col(i, j)] - v);
        if (!std::isfinite(next)) throw ConvergenceError("non-finite iterate at iteration " + std::to_string(it));
        upd = std::max(upd, std::abs(next - v));
        v = next;
      }
    }
    sol.iterations = it;
    sol.final_update = upd;
    history.push_back(upd);
    if (history.size() > 21) history.pop_front();
    if (history.size() == 21 && upd > 10.0 * history.front() && upd > problem.solver.tol) {
      throw ConvergenceError("Picard iteration diverges: update grew from " + std::to_string(history.front()) +
                             " to " + std::to_string(upd) + " over 20 iterations");
    }
    if (upd < problem.solver.tol) {
      sol.converged = true;
      break;
    }
  }

  double res = 0.0;
  for (int i = 1; i < g.nr - 1; ++i) {
    const Stencil& s = st[static_cast<std::size_t>(i)];
    for (int j = 1; j < g.nu - 1; ++j) {
      const auto v = [&](int a, int b) { return sol.psi[g.index(a, b)]; };
      const double lhs = s.c * v(i, j) + s.rm * v(i - 1, j) + s.rp * v(i + 1, j) + s.um * v(i, j - 1) +
                         s.up * v(i, j + 1) + nonlinear(problem, g.r(i), v(i, j));
      res = std::max(res, std::abs(lhs - (S ? S(g.r(i), g.u(j)) : 0.0)));
    }
  }
  sol.discrete_residual = res;
  if (!sol.converged) {
    sol.warnings.push_back("iteration cap " + std::to_string(problem.solver.max_iter) +
                           " reached with update " + std::to_string(sol.final_update));
  }
  return sol;
}

double error_vs_exact(const FluxSolution& sol) {
  if (!sol.problem.exact) throw ValidationError("problem has no exact solution");
  const Grid2& g = sol.grid();
  double e = 0.0;
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nu; ++j) e = std::max(e, std::abs(sol.at(i, j) - (*sol.problem.exact)(g.r(i), g.u(j))));
  }
  return e;
}

void export_solution(const FluxSolution& sol, const std::filesystem::path& csv) {
  const Grid2& g = sol.grid();
  std::string out = "r,zu,psi\n";
  out.reserve(g.size() * 64);
  for (int i = 0; i < g.nr; ++i) {
    for (int j = 0; j < g.nu; ++j) {
      out += fields::format_double(g.r(i)) + "," + fields::format_double(g.u(j)) + "," +
             fields::format_double(sol.at(i, j)) + "\n";
    }
  }
  write_text_file(csv, out);
  write_text_file(csv.string() + ".problem", sol.problem.to_text());
}

FluxSolution read_solution(const std::filesystem::path& csv) {
  FluxSolution sol;
  sol.problem = load_problem(csv.string() + ".problem");
  const Grid2& g = sol.grid();
  std::istringstream in(read_text_file(csv));
  std::string line;
  if (!std::getline(in, line) || line != "r,zu,psi") throw ParseError("expected header 'r,zu,psi'", 1, 1);
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("not a number: '" + cell + "'", row, 1);
      }
    }
    if (v.size() != 3) throw ParseError("expected 3 columns", row, 1);
    const auto n = sol.psi.size();
    if (n >= g.size()) throw ValidationError("solution has more rows than the problem grid");
    const int i = static_cast<int>(n / static_cast<std::size_t>(g.nu));
    const int j = static_cast<int>(n % static_cast<std::size_t>(g.nu));
    if (std::abs(v[0] - g.r(i)) > 1e-9 * (1.0 + std::abs(g.r(i))) ||
        std::abs(v[1] - g.u(j)) > 1e-9 * (1.0 + std::abs(g.u(j)))) {
      throw ValidationError("row " + std::to_string(row) + " does not match the problem grid");
    }
    sol.psi.push_back(v[2]);
  }
  if (sol.psi.size() != g.size()) {
    throw ValidationError("solution has " + std::to_string(sol.psi.size()) + " rows; problem grid needs " +
                          std::to_string(g.size()));
  }
  sol.converged = true;
  return sol;
}

}  // namespace plasmasym::flux
