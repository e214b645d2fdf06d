#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "plasmasym/state.hpp"

namespace plasmasym::equilibria {

enum class Flag : std::uint8_t { stable, unstable, not_applicable, indeterminate };
std::string_view flag_name(Flag f);

/// Fire-hose unstable iff p_par - p_perp > B^2. Not applicable if B^2 <= eps_B.
Flag firehose_flag(double p_perp, double p_par, double b2, double eps_B);
/// Mirror unstable iff p_perp (p_perp / (6 p_par) - 1) > B^2 / 2.
/// Indeterminate if p_par = 0; not applicable if B^2 <= eps_B.
Flag mirror_flag(double p_perp, double p_par, double b2, double eps_B);

/// Field-null threshold 1e-12 * max B^2.
double eps_B(const CGLState& state);

struct CriterionSummary {
  int stable = 0;
  int unstable = 0;
  int not_applicable = 0;
  int indeterminate = 0;
  /// Largest value of (lhs - rhs) over evaluated nodes; > 0 iff some node
  /// is unstable. Zero if nothing was evaluated.
  double max_margin = 0.0;
};

struct StabilityReport {
  std::vector<Flag> firehose;
  std::vector<Flag> mirror;
  CriterionSummary firehose_summary;
  CriterionSummary mirror_summary;
  double eps_B = 0.0;
};

/// Evaluates both criteria at active nodes; inactive nodes are not applicable.
StabilityReport stability_report(const CGLState& state);

}  // namespace plasmasym::equilibria
