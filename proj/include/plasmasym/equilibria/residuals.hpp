#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plasmasym/state.hpp"

namespace plasmasym::equilibria {

/// mhd: curl B x B = grad P (P := p_perp), div B = 0.
/// cgl: (1 - tau) curl B x B = grad p_perp + tau grad(B^2/2) + B (B . grad tau),
///      div B = 0, B . grad tau = 0.
/// alt: curl(sqrt(1-tau) B) x sqrt(1-tau) B = grad(p_perp + tau B^2/2),
///      div B = 0, B . grad tau = 0, B . grad(p_perp + tau B^2/2) = 0.
enum class System { mhd, cgl, alt };

System system_from_name(std::string_view name);
std::string_view system_name(System s);

/// Left-minus-right side of one equation on the stencil interior.
struct EquationResidual {
  std::string name;
  bool is_vector = false;
  fields::VectorGrid vec;  ///< set when is_vector
  fields::ScalarGrid sca;  ///< set otherwise
};

struct ResidualFields {
  System system = System::mhd;
  int stride = 1;
  fields::Grid3 grid;  ///< interior(stride) of the state grid
  fields::Mask mask;   ///< active nodes of `grid`
  std::vector<EquationResidual> equations;

  const EquationResidual& get(std::string_view name) const;
};

/// Throws MathError in alt mode if tau >= 1 at any node.
ResidualFields residual_fields(const CGLState& state, System system, int stride = 1);

struct ResidualNorm {
  std::string name;
  double linf = 0.0;
  double l2 = 0.0;
};

/// Norms over active interior nodes, in equation order.
std::vector<ResidualNorm> residual_norms(const CGLState& state, System system, int stride = 1);

/// Two-grid probe: R_h uses stride 1, R_2h stride 2 on the same nodes. The
/// O(h^2) estimate is Linf(R_2h - R_h)/3; an equation passes when
/// Linf(R_h) <= factor * estimate + floor.
struct ProbeEntry {
  std::string name;
  double linf_h = 0.0;
  double l2_h = 0.0;
  double linf_2h = 0.0;
  double estimate = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ProbeReport {
  System system = System::mhd;
  double factor = 10.0;
  double floor = 1e-12;
  std::vector<ProbeEntry> entries;
  bool pass = false;
};

ProbeReport two_grid_check(const CGLState& state, System system, double factor = 10.0,
                           double floor = 1e-12);

}  // namespace plasmasym::equilibria
