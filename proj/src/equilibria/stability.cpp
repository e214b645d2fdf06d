#include "plasmasym/equilibria/stability.hpp"

#include <algorithm>
#include <limits>

namespace plasmasym::equilibria {

std::string_view flag_name(Flag f) {
  switch (f) {
    case Flag::stable: return "stable";
    case Flag::unstable: return "unstable";
    case Flag::not_applicable: return "not_applicable";
    case Flag::indeterminate: return "indeterminate";
  }
  return "?";
}

Flag firehose_flag(double p_perp, double p_par, double b2, double eps_B) {
  if (!(b2 > eps_B)) return Flag::not_applicable;
  return p_par - p_perp > b2 ? Flag::unstable : Flag::stable;
}

Flag mirror_flag(double p_perp, double p_par, double b2, double eps_B) {
  if (!(b2 > eps_B)) return Flag::not_applicable;
  if (p_par == 0.0) return Flag::indeterminate;
  return p_perp * (p_perp / (6.0 * p_par) - 1.0) > b2 / 2.0 ? Flag::unstable : Flag::stable;
}

double eps_B(const CGLState& state) {
  double mx = 0.0;
  for (const auto& b : state.B.values) mx = std::max(mx, fields::dot(b, b));
  return 1e-12 * mx;
}

namespace {

void tally(CriterionSummary& s, Flag f, double margin, bool& first) {
  switch (f) {
    case Flag::stable: ++s.stable; break;
    case Flag::unstable: ++s.unstable; break;
    case Flag::not_applicable: ++s.not_applicable; return;
    case Flag::indeterminate: ++s.indeterminate; return;
  }
  s.max_margin = first ? margin : std::max(s.max_margin, margin);
  first = false;
}

}  // namespace

StabilityReport stability_report(const CGLState& state) {
  state.validate();
  StabilityReport r;
  r.eps_B = eps_B(state);
  const std::size_t size = state.grid().size();
  r.firehose.resize(size);
  r.mirror.resize(size);
  bool first_f = true;
  bool first_m = true;
  for (std::size_t n = 0; n < size; ++n) {
    const double pp = state.p_perp.values[n];
    const double pl = state.p_par.values[n];
    const double b2 = fields::dot(state.B.values[n], state.B.values[n]);
    const bool active = state.is_active(n);
    r.firehose[n] = active ? firehose_flag(pp, pl, b2, r.eps_B) : Flag::not_applicable;
    r.mirror[n] = active ? mirror_flag(pp, pl, b2, r.eps_B) : Flag::not_applicable;
    tally(r.firehose_summary, r.firehose[n], pl - pp - b2, first_f);
    const double mm = pl != 0.0 ? pp * (pp / (6.0 * pl) - 1.0) - b2 / 2.0 : 0.0;
    tally(r.mirror_summary, r.mirror[n], mm, first_m);
  }
  return r;
}

}  // namespace plasmasym::equilibria
