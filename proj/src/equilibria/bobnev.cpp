#include "plasmasym/equilibria/bobnev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "plasmasym/error.hpp"

namespace plasmasym::equilibria {

namespace {

constexpr double kSeriesRadius = 0.5;

// 3 * sum_{k>=k0} (-1)^(k+1) c_k x^(2k-p) / (2k+1)!, summed until negligible.
template <class Coef>
double series(double x, int k0, int power_shift, Coef coef) {
  double sum = 0.0;
  for (int k = k0; k < 40; ++k) {
    double fact = 1.0;
    for (int i = 2; i <= 2 * k + 1; ++i) fact *= i;
    const double term = coef(k) * std::pow(x, 2 * k - power_shift) / fact;
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return 3.0 * sum;
}

}  // namespace

double v0(double x) {
  if (std::abs(x) < kSeriesRadius) return series(x, 1, 2, [](int k) { return 2.0 * k; });
  return 3.0 * (std::sin(x) / (x * x * x) - std::cos(x) / (x * x));
}

double v0_prime(double x) {
  if (std::abs(x) < kSeriesRadius) {
    return series(x, 2, 3, [](int k) { return 2.0 * k * (2.0 * k - 2.0); });
  }
  const double s = std::sin(x);
  const double c = std::cos(x);
  return 3.0 * (s / (x * x) + 3.0 * c / (x * x * x) - 3.0 * s / (x * x * x * x));
}

double v0_prime_over_x(double x) {
  if (std::abs(x) < kSeriesRadius) {
    return series(x, 2, 4, [](int k) { return 2.0 * k * (2.0 * k - 2.0); });
  }
  return v0_prime(x) / x;
}

double lambda_equation(double R, double lambda) {
  const double a = 2.0 * R * lambda;
  return (3.0 - a * a) * std::sin(a) - 3.0 * a * std::cos(a);
}

double find_lambda(double R, int n) {
  if (!(R > 0.0) || !std::isfinite(R)) throw ValidationError("R must be positive");
  if (n < 1) throw ValidationError("mode index n must be >= 1");

  // Scan in a = 2 R lambda. The origin is a fifth-order root (g ~ a^5/15)
  // and is skipped; nontrivial roots are about pi apart.
  constexpr double kStep = 0.1;
  constexpr double kLimit = 1e6;
  auto g = [R](double lam) { return lambda_equation(R, lam); };
  int found = 0;
  double a0 = 1.0;
  double g0 = g(a0 / (2 * R));
  for (double a1 = a0 + kStep; a1 < kLimit; a0 = a1, a1 += kStep) {
    const double g1 = g(a1 / (2 * R));
    if ((g0 < 0) != (g1 < 0) && ++found == n) {
      const auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1);
      const auto [lo, hi] = boost::math::tools::bisect(g, a0 / (2 * R), a1 / (2 * R), tol);
      const double lam = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
      if (!(std::abs(g(lam)) < 1e-10)) {
        throw ConvergenceError("lambda root " + std::to_string(n) + " not resolved to |g| < 1e-10");
      }
      return lam;
    }
    g0 = g1;
  }
  throw ConvergenceError("mode index " + std::to_string(n) + " lies beyond the lambda scan limit");
}

BobnevParams BobnevParams::make(double R, double B0, double P0, int n, PressureForm pressure) {
  if (!std::isfinite(B0) || !std::isfinite(P0)) throw ValidationError("B0 and P0 must be finite");
  BobnevParams p;
  p.R = R;
  p.B0 = B0;
  p.P0 = P0;
  p.n = n;
  p.pressure = pressure;
  p.lambda = find_lambda(R, n);
  const double v0R = v0(2.0 * p.lambda * R);
  if (std::abs(1.0 - v0R) < 1e-12) throw ValidationError("V0(2 lambda R) = 1: degenerate vortex");
  p.gamma_b = B0 * v0R / (1.0 - v0R);
  return p;
}

BobnevVortex::BobnevVortex(const BobnevParams& params) : p_(params) {
  if (!(p_.R > 0.0) || !(p_.lambda > 0.0)) throw ValidationError("Bobnev parameters not initialized");
  v0R_ = v0(2.0 * p_.lambda * p_.R);

  // Extremes of P over the sphere sit at sin^2(theta) in {0, 1}.
  auto neg_abs = [&](double rho) { return -std::abs(p_.P0 + q(rho)); };
  constexpr int kScan = 2000;
  double best_rho = 0.0;
  for (int i = 0; i <= kScan; ++i) {
    const double rho = p_.R * i / kScan;
    if (neg_abs(rho) < neg_abs(best_rho)) best_rho = rho;
  }
  const double lo = std::max(0.0, best_rho - p_.R / kScan);
  const double hi = std::min(p_.R, best_rho + p_.R / kScan);
  const auto refined = boost::math::tools::brent_find_minima(neg_abs, lo, hi, 52);
  p_max_ = std::max({std::abs(p_.P0), -refined.second, -neg_abs(best_rho)});
  if (!(p_max_ > 0.0)) throw ValidationError("Bobnev pressure vanishes identically; Psi undefined");
}

double BobnevVortex::V(double rho) const {
  return p_.B0 * (v0(2.0 * p_.lambda * rho) - v0R_) / (1.0 - v0R_);
}

double BobnevVortex::G(double rho) const {
  return p_.B0 / (1.0 - v0R_) * 2.0 * p_.lambda * p_.lambda * v0_prime_over_x(2.0 * p_.lambda * rho);
}

double BobnevVortex::q(double rho) const {
  const double base = p_.gamma_b * rho * rho * V(rho);
  return p_.pressure == PressureForm::corrected ? p_.lambda * p_.lambda * base : -base;
}

Vec3 BobnevVortex::B(const Vec3& x) const {
  const double s2 = x[0] * x[0] + x[1] * x[1];
  const double rho = std::sqrt(s2 + x[2] * x[2]);
  if (rho > p_.R) return {0.0, 0.0, 0.0};
  const double v = V(rho);
  const double g = G(rho);
  const double lv = p_.lambda * v;
  return {-g * x[2] * x[0] - lv * x[1], -g * x[2] * x[1] + lv * x[0], v + g * s2};
}

double BobnevVortex::P(const Vec3& x) const {
  const double s2 = x[0] * x[0] + x[1] * x[1];
  const double rho2 = s2 + x[2] * x[2];
  const double rho = std::sqrt(rho2);
  if (rho > p_.R) return p_.P0;
  if (rho2 == 0.0) return p_.P0;
  return p_.P0 + q(rho) * s2 / rho2;
}

AnalyticState BobnevVortex::analytic() const {
  AnalyticState s;
  s.at = [self = *this](const Vec3& x) {
    PointState ps;
    ps.B = self.B(x);
    ps.p_perp = ps.p_par = self.P(x);
    ps.psi = self.psi(x);
    return ps;
  };
  s.active = [R = p_.R](const Vec3& x, const Grid3& g) {
    const double h = std::max({g.h[0], g.h[1], g.h[2]});
    return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) <= R - 2.0 * h;
  };
  s.provenance = "bobnev R=" + std::to_string(p_.R) + " B0=" + std::to_string(p_.B0) +
                 " P0=" + std::to_string(p_.P0) + " n=" + std::to_string(p_.n) +
                 (p_.pressure == PressureForm::corrected ? " pressure=corrected" : " pressure=as-printed");
  return s;
}

CGLState bobnev_state(const BobnevParams& params, const Grid3& g) {
  return sample_state(BobnevVortex(params).analytic(), g);
}

}  // namespace plasmasym::equilibria
