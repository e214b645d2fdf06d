#pragma once

#include "plasmasym/equilibria/analytic.hpp"

namespace plasmasym::equilibria {

/// V0(x) = 3 (sin x / x^3 - cos x / x^2); Taylor series for |x| < 0.5.
double v0(double x);
double v0_prime(double x);
/// V0'(x) / x, finite at x = 0 (value -1/5).
double v0_prime_over_x(double x);

/// (3 - 4 R^2 l^2) sin(2 R l) - 6 R l cos(2 R l).
double lambda_equation(double R, double lambda);

/// n-th positive root (n >= 1) of lambda_equation, by scan and bisection.
/// Result satisfies |g| < 1e-10; throws ConvergenceError past the internal
/// scan limit.
double find_lambda(double R, int n);

enum class PressureForm {
  corrected,   ///< P = P0 + lambda^2 gamma rho^2 V sin^2(theta): force balance holds
  as_printed,  ///< P = P0 - gamma rho^2 V sin^2(theta)
};

struct BobnevParams {
  double R = 1.0;
  double B0 = 1.0;
  double P0 = 0.05;
  int n = 3;
  double lambda = 0.0;   ///< filled by make()
  double gamma_b = 0.0;  ///< B0 V0(2 lambda R) / (1 - V0(2 lambda R))
  PressureForm pressure = PressureForm::corrected;

  /// Validates inputs and solves for lambda and gamma_b.
  static BobnevParams make(double R, double B0, double P0, int n,
                           PressureForm pressure = PressureForm::corrected);
};

/// Localized axisymmetric vortex inside the sphere rho <= R; B = 0 and
/// P = P0 outside. Isotropic: tau = 0, p_perp = p_par = P.
class BobnevVortex {
 public:
  explicit BobnevVortex(const BobnevParams& params);

  const BobnevParams& params() const { return p_; }
  Vec3 B(const Vec3& x) const;
  double P(const Vec3& x) const;
  /// max |P| over the sphere, used to normalize Psi = P / max|P|.
  double p_max() const { return p_max_; }
  double psi(const Vec3& x) const { return P(x) / p_max_; }

  /// Active region: rho <= R - 2h with h the largest spacing.
  AnalyticState analytic() const;

 private:
  double V(double rho) const;
  double G(double rho) const;  // V'(rho) / (2 rho)
  double q(double rho) const;  // P = P0 + q(rho) sin^2(theta)

  BobnevParams p_;
  double v0R_ = 0.0;
  double p_max_ = 1.0;
};

CGLState bobnev_state(const BobnevParams& params, const Grid3& g);

}  // namespace plasmasym::equilibria
