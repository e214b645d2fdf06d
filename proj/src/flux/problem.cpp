#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "plasmasym/error.hpp"
#include "plasmasym/flux/flux.hpp"
#include "plasmasym/io.hpp"

namespace plasmasym::flux {

using expr::ScalarFunction;

std::string_view geometry_name(Geometry g) {
  return g == Geometry::axisymmetric ? "axisymmetric" : "helical";
}

void FluxProblem::validate() const {
  const Grid2& g = grid;
  if (!std::isfinite(g.r0) || !std::isfinite(g.r1) || !(g.r0 > 0.0)) {
    throw ValidationError("r_min must be positive and finite (the axis is excluded)");
  }
  if (!(g.r1 > g.r0)) throw ValidationError("r_max must exceed r_min");
  if (!std::isfinite(g.a) || !std::isfinite(g.b) || !(g.b > g.a)) {
    throw ValidationError(std::string(coord()) + "_max must exceed " + std::string(coord()) + "_min");
  }
  if (g.nr < 9 || g.nu < 9) throw ValidationError("resolution must be at least 9 x 9");
  if (!std::isfinite(gamma)) throw ValidationError("gamma must be finite");
  if (!(solver.tol > 0.0)) throw ValidationError("tol must be positive");
  if (solver.max_iter < 1) throw ValidationError("max_iter must be >= 1");
  if (!(solver.omega > 0.0 && solver.omega <= 1.0)) throw ValidationError("omega must lie in (0, 1]");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ValidationError("key '" + key + "': expected a finite number, got '" + v + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ValidationError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

FluxProblem parse_problem(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, 1);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError("empty key or value", lineno, 1);
    if (!kv.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", lineno, 1);
  }

  static const std::set<std::string> known = {
      "geometry", "gamma",   "r_min",   "r_max",    "z_min",    "z_max",        "u_min",  "u_max",
      "resolution", "nr",    "nz",      "nu",       "J",        "J_prime",      "N_prime", "L_prime",
      "boundary", "source",  "manufactured", "psi_ref", "N_ref", "tol",        "max_iter", "omega"};
  for (const auto& [k, v] : kv) {
    if (!known.count(k)) throw ValidationError("unknown key '" + k + "' in flux problem");
  }
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto either = [&](const std::string& a, const std::string& b) -> const std::string* {
    if (get(a) && get(b)) throw ValidationError("keys '" + a + "' and '" + b + "' are aliases; give one");
    return get(a) ? get(a) : get(b);
  };

  FluxProblem p;
  if (const auto* g = get("geometry")) {
    if (*g == "axisymmetric") {
      p.geometry = Geometry::axisymmetric;
    } else if (*g == "helical") {
      p.geometry = Geometry::helical;
    } else {
      throw ValidationError("geometry must be 'axisymmetric' or 'helical', got '" + *g + "'");
    }
  }
  if (const auto* v = get("gamma")) p.gamma = to_double("gamma", *v);
  if (p.geometry == Geometry::helical && !get("gamma")) throw ValidationError("helical geometry needs gamma");

  auto need = [&](const std::string* v, const std::string& name) -> const std::string& {
    if (!v) throw ValidationError("missing key '" + name + "'");
    return *v;
  };
  p.grid.r0 = to_double("r_min", need(get("r_min"), "r_min"));
  p.grid.r1 = to_double("r_max", need(get("r_max"), "r_max"));
  p.grid.a = to_double("z_min", need(either("z_min", "u_min"), "z_min"));
  p.grid.b = to_double("z_max", need(either("z_max", "u_max"), "z_max"));
  int n = 33;
  if (const auto* v = get("resolution")) n = to_int("resolution", *v);
  p.grid.nr = get("nr") ? to_int("nr", *get("nr")) : n;
  const auto* nz = either("nz", "nu");
  p.grid.nu = nz ? to_int("nz", *nz) : n;

  if (const auto* v = get("tol")) p.solver.tol = to_double("tol", *v);
  if (const auto* v = get("max_iter")) p.solver.max_iter = to_int("max_iter", *v);
  if (const auto* v = get("omega")) p.solver.omega = to_double("omega", *v);
  if (const auto* v = get("psi_ref")) p.psi_ref = to_double("psi_ref", *v);
  if (const auto* v = get("N_ref")) p.N_ref = to_double("N_ref", *v);

  const std::vector<std::string> psi_var{"psi"};
  const std::vector<std::string> space{"r", std::string(p.coord())};
  if (const auto* v = get("J")) p.J = ScalarFunction(*v, psi_var);
  if (const auto* v = get("J_prime")) p.J_prime = ScalarFunction(*v, psi_var);
  if (const auto* v = either("N_prime", "L_prime")) p.N_prime = ScalarFunction(*v, psi_var);

  const auto* m = get("manufactured");
  if (m && (get("boundary") || get("source"))) {
    throw ValidationError("'manufactured' replaces 'boundary' and 'source'; give one or the other");
  }
  if (m) {
    manufacture(p, ScalarFunction(*m, space));
  } else {
    p.boundary = ScalarFunction(need(get("boundary"), "boundary"), space);
    if (const auto* v = get("source")) p.source = ScalarFunction(*v, space);
  }
  p.validate();
  return p;
}

FluxProblem load_problem(const std::filesystem::path& path) { return parse_problem(read_text_file(path)); }

std::string FluxProblem::to_text() const {
  std::ostringstream os;
  const std::string c(coord());
  os << "geometry = " << geometry_name(geometry) << "\n";
  if (geometry == Geometry::helical) os << "gamma = " << num(gamma) << "\n";
  os << "r_min = " << num(grid.r0) << "\nr_max = " << num(grid.r1) << "\n";
  os << c << "_min = " << num(grid.a) << "\n" << c << "_max = " << num(grid.b) << "\n";
  os << "nr = " << grid.nr << "\nn" << c << " = " << grid.nu << "\n";
  os << "J = " << J.text() << "\nJ_prime = " << J_prime.text() << "\n";
  os << (geometry == Geometry::axisymmetric ? "N_prime = " : "L_prime = ") << N_prime.text() << "\n";
  if (exact) {
    os << "manufactured = " << exact->text() << "\n";
  } else {
    os << "boundary = " << boundary.text() << "\n";
    if (source) os << "source = " << source->text() << "\n";
  }
  if (psi_ref) os << "psi_ref = " << num(*psi_ref) << "\n";
  os << "N_ref = " << num(N_ref) << "\n";
  os << "tol = " << num(solver.tol) << "\nmax_iter = " << solver.max_iter << "\nomega = " << num(solver.omega) << "\n";
  return os.str();
}

std::function<double(double, double)> apply_operator(const FluxProblem& p, const ScalarFunction& psi) {
  const ScalarFunction pr = psi.derivative(0);
  const ScalarFunction pu = psi.derivative(1);
  const ScalarFunction prr = pr.derivative(0);
  const ScalarFunction puu = pu.derivative(1);
  return [=, J = p.J, Jp = p.J_prime, Np = p.N_prime, geo = p.geometry, g = p.gamma](double r, double u) {
    const double v = psi(r, u);
    const double j = J(v);
    if (geo == Geometry::axisymmetric) {
      return prr(r, u) - pr(r, u) / r + puu(r, u) + j * Jp(v) + r * r * Np(v);
    }
    const double q = r * r + g * g;
    const double a = r / q;
    const double da = (g * g - r * r) / (q * q);
    return puu(r, u) / (r * r) + (da * pr(r, u) + a * prr(r, u)) / r + j * Jp(v) / q + 2.0 * g * j / (q * q) + Np(v);
  };
}

void manufacture(FluxProblem& p, const ScalarFunction& psi_star) {
  p.boundary = psi_star;
  p.exact = psi_star;
  p.source.reset();
}

}  // namespace plasmasym::flux
