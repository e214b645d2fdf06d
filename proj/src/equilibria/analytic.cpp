#include "plasmasym/equilibria/analytic.hpp"

#include <cmath>
#include <sstream>

#include "plasmasym/error.hpp"

namespace plasmasym::equilibria {

CGLState sample_state(const AnalyticState& s, const Grid3& g) {
  g.validate();
  const std::size_t size = g.size();
  CGLState out;
  out.B = {g, std::vector<Vec3>(size)};
  for (auto* f : {&out.p_perp, &out.p_par, &out.tau, &out.psi}) *f = {g, std::vector<double>(size)};
  for (std::size_t n = 0; n < size; ++n) {
    const Vec3 x = g.point(n);
    const PointState p = s.at(x);
    for (double v : {p.B[0], p.B[1], p.B[2], p.p_perp, p.p_par, p.tau, p.psi}) {
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite sample at node " << n << " (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
        throw MathError(os.str());
      }
    }
    out.B.values[n] = p.B;
    out.p_perp.values[n] = p.p_perp;
    out.p_par.values[n] = p.p_par;
    out.tau.values[n] = p.tau;
    out.psi.values[n] = p.psi;
  }
  if (s.active) {
    out.active.resize(size);
    for (std::size_t n = 0; n < size; ++n) out.active[n] = s.active(g.point(n), g) ? 1 : 0;
  }
  out.provenance = s.provenance;
  return out;
}

}  // namespace plasmasym::equilibria
