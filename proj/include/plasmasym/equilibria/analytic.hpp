#pragma once

#include <functional>
#include <string>

#include "plasmasym/state.hpp"

namespace plasmasym::equilibria {

using fields::Grid3;
using fields::Vec3;

/// State values at one point.
struct PointState {
  Vec3 B{0.0, 0.0, 0.0};
  double p_perp = 0.0;
  double p_par = 0.0;
  double tau = 0.0;
  double psi = 0.0;
};

/// Closed-form state; composes exactly under point transformations.
struct AnalyticState {
  std::function<PointState(const Vec3&)> at;
  /// Nodes where residual checks apply; null means everywhere.
  std::function<bool(const Vec3&, const Grid3&)> active;
  std::string provenance;
};

/// Samples every field; throws MathError naming a non-finite node.
CGLState sample_state(const AnalyticState& s, const Grid3& g);

}  // namespace plasmasym::equilibria
