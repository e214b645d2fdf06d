#pragma once

#include <array>
#include <string>
#include <variant>

#include "plasmasym/equilibria/analytic.hpp"
#include "plasmasym/expr/parser.hpp"

namespace plasmasym::equilibria {

/// M(Psi) = alpha * exp(H(Psi)), given as a whitelisted expression in `psi`.
class TransformSpec {
 public:
  /// Accepts "1 + psi*sin(psi)" or "M = 1 + psi*sin(psi)".
  explicit TransformSpec(std::string_view text);

  double M(double psi) const { return m_(psi); }
  int alpha(double psi) const { return M(psi) < 0.0 ? -1 : 1; }
  double H(double psi) const;
  const std::string& text() const { return text_; }

  /// Group product: M = this.M * other.M.
  TransformSpec compose(const TransformSpec& other) const;
  TransformSpec inverse() const;

 private:
  std::string text_;
  expr::ScalarFunction m_;
};

/// B1 = M B, tau1 = 1 - (1 - tau)/M^2, p_perp1 = p_perp + (B^2 - B1^2)/2,
/// p_par1 = p_perp1 + tau1 B1^2 on consistent states. Psi is unchanged and
/// nodes with B = 0 pass through. Throws ValidationError if |M| < m_min at
/// an attained Psi.
CGLState apply_infinite_transform(const CGLState& state, const TransformSpec& spec, double m_min = 1e-8);
PointState apply_infinite_transform(const PointState& p, double M);

struct Translate {
  double K1 = 0.0, K2 = 0.0, K3 = 0.0, K4 = 0.0;
  double eps = 1.0;
};
/// Euler angles of the z-x-z chain Q = D(phi) C(theta) D(psi).
struct Rotate {
  double phi = 0.0, theta = 0.0, psi = 0.0;
};
/// x' = t x, B' = s B, p_perp' = 2 s p_perp (literal) or s^2 p_perp.
struct Scale {
  double t = 1.0, s = 1.0;
  bool squared = false;
};
/// (p_perp + B^2/2)' = C (p_perp + B^2/2), (1 - tau)' = C (1 - tau).
struct Scale3 {
  double C = 1.0;
};
using PointSymmetry = std::variant<Translate, Rotate, Scale, Scale3>;

using Mat3 = std::array<std::array<double, 3>, 3>;
Mat3 euler_matrix(const Rotate& r);

/// Exact composition with the evaluator.
AnalyticState apply_point_symmetry(const AnalyticState& state, const PointSymmetry& op);
/// Sampled version. Translations and scalings move the grid; rotations
/// resample onto the same grid by trilinear interpolation (marked lossy in
/// the provenance; nodes whose preimage leaves the grid become inactive).
CGLState apply_point_symmetry(const CGLState& state, const PointSymmetry& op);

}  // namespace plasmasym::equilibria
