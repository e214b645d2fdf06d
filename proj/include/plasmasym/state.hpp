#pragma once

#include <string>

#include "plasmasym/fields/grid.hpp"

namespace plasmasym {

/// Sampled anisotropic equilibrium. All fields share B.grid. `active`
/// marks nodes inside the plasma region (empty means every node).
struct CGLState {
  fields::VectorGrid B;
  fields::ScalarGrid p_perp;
  fields::ScalarGrid p_par;
  fields::ScalarGrid tau;
  fields::ScalarGrid psi;
  fields::Mask active;
  std::string provenance;

  const fields::Grid3& grid() const { return B.grid; }
  bool is_active(std::size_t n) const { return active.empty() || active[n] != 0; }
  /// Throws ValidationError unless every field lives on one grid.
  void validate() const;
};

}  // namespace plasmasym
