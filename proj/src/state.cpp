#include "plasmasym/state.hpp"

#include "plasmasym/error.hpp"

namespace plasmasym {

void CGLState::validate() const {
  const fields::Grid3& g = B.grid;
  g.validate();
  if (B.values.size() != g.size()) throw ValidationError("B has the wrong number of nodes");
  for (const auto* f : {&p_perp, &p_par, &tau, &psi}) {
    if (!(f->grid == g) || f->values.size() != g.size()) {
      throw ValidationError("state fields do not share one grid");
    }
  }
  if (!active.empty() && active.size() != g.size()) throw ValidationError("active mask size mismatch");
}

}  // namespace plasmasym
