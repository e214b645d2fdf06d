#include "plasmasym/equilibria/residuals.hpp"

#include <algorithm>
#include <cmath>

#include "plasmasym/error.hpp"

namespace plasmasym::equilibria {

using fields::cross;
using fields::dot;
using fields::Mask;
using fields::Norm;
using fields::ScalarGrid;
using fields::Vec3;
using fields::VectorGrid;

System system_from_name(std::string_view name) {
  if (name == "mhd") return System::mhd;
  if (name == "cgl") return System::cgl;
  if (name == "alt") return System::alt;
  throw ValidationError("unknown system '" + std::string(name) + "' (expected mhd, cgl or alt)");
}

std::string_view system_name(System s) {
  switch (s) {
    case System::mhd: return "mhd";
    case System::cgl: return "cgl";
    case System::alt: return "alt";
  }
  return "?";
}

const EquationResidual& ResidualFields::get(std::string_view name) const {
  for (const auto& e : equations) {
    if (e.name == name) return e;
  }
  throw ValidationError("no residual named '" + std::string(name) + "'");
}

namespace {

template <class F>
ScalarGrid nodewise(const fields::Grid3& g, F f) {
  ScalarGrid out{g, std::vector<double>(g.size())};
  for (std::size_t n = 0; n < g.size(); ++n) out.values[n] = f(n);
  return out;
}

EquationResidual scalar_eq(std::string name, ScalarGrid s) {
  EquationResidual r;
  r.name = std::move(name);
  r.sca = std::move(s);
  return r;
}

EquationResidual vector_eq(std::string name, VectorGrid v) {
  EquationResidual r;
  r.name = std::move(name);
  r.is_vector = true;
  r.vec = std::move(v);
  return r;
}

}  // namespace

ResidualFields residual_fields(const CGLState& state, System system, int stride) {
  state.validate();
  const fields::Grid3& g = state.grid();
  const int s = stride;

  ResidualFields out;
  out.system = system;
  out.stride = s;
  out.grid = g.interior(s);
  out.mask = state.active.empty() ? Mask(out.grid.size(), 1) : fields::crop(state.active, g, s);

  const VectorGrid& B = state.B;
  const VectorGrid Bi = fields::crop(B, s);
  const ScalarGrid half_b2 = nodewise(g, [&](std::size_t n) { return 0.5 * dot(B.values[n], B.values[n]); });

  out.equations.push_back(scalar_eq("div_B", fields::divergence(B, s)));

  if (system == System::mhd) {
    const VectorGrid J = fields::curl(B, s);
    const VectorGrid gp = fields::gradient(state.p_perp, s);
    VectorGrid mom{out.grid, std::vector<Vec3>(out.grid.size())};
    for (std::size_t n = 0; n < mom.values.size(); ++n) {
      const Vec3 f = cross(J.values[n], Bi.values[n]);
      for (std::size_t a = 0; a < 3; ++a) mom.values[n][a] = f[a] - gp.values[n][a];
    }
    out.equations.insert(out.equations.begin(), vector_eq("momentum", std::move(mom)));
    return out;
  }

  const ScalarGrid closure = fields::directional(B, state.tau, s);

  if (system == System::cgl) {
    const VectorGrid J = fields::curl(B, s);
    const VectorGrid gp = fields::gradient(state.p_perp, s);
    const VectorGrid gb = fields::gradient(half_b2, s);
    const ScalarGrid taui = fields::crop(state.tau, s);
    VectorGrid mom{out.grid, std::vector<Vec3>(out.grid.size())};
    for (std::size_t n = 0; n < mom.values.size(); ++n) {
      const double t = taui.values[n];
      const Vec3 f = cross(J.values[n], Bi.values[n]);
      for (std::size_t a = 0; a < 3; ++a) {
        mom.values[n][a] = (1.0 - t) * f[a] - gp.values[n][a] - t * gb.values[n][a] -
                           Bi.values[n][a] * closure.values[n];
      }
    }
    out.equations.insert(out.equations.begin(), vector_eq("momentum", std::move(mom)));
    out.equations.push_back(scalar_eq("closure", closure));
    return out;
  }

  // alt
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(state.tau.values[n] < 1.0)) {
      throw MathError("alternative form needs tau < 1; tau = " + std::to_string(state.tau.values[n]) +
                      " at node " + std::to_string(n));
    }
  }
  VectorGrid fb{g, std::vector<Vec3>(g.size())};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double f = std::sqrt(1.0 - state.tau.values[n]);
    for (std::size_t a = 0; a < 3; ++a) fb.values[n][a] = f * B.values[n][a];
  }
  const ScalarGrid inv = nodewise(g, [&](std::size_t n) {
    return state.p_perp.values[n] + state.tau.values[n] * half_b2.values[n];
  });
  const VectorGrid J = fields::curl(fb, s);
  const VectorGrid fbi = fields::crop(fb, s);
  const VectorGrid ginv = fields::gradient(inv, s);
  VectorGrid mom{out.grid, std::vector<Vec3>(out.grid.size())};
  for (std::size_t n = 0; n < mom.values.size(); ++n) {
    const Vec3 f = cross(J.values[n], fbi.values[n]);
    for (std::size_t a = 0; a < 3; ++a) mom.values[n][a] = f[a] - ginv.values[n][a];
  }
  out.equations.insert(out.equations.begin(), vector_eq("momentum", std::move(mom)));
  out.equations.push_back(scalar_eq("closure", closure));
  out.equations.push_back(scalar_eq("invariant_transport", fields::directional(B, inv, s)));
  return out;
}

std::vector<ResidualNorm> residual_norms(const CGLState& state, System system, int stride) {
  const ResidualFields r = residual_fields(state, system, stride);
  std::vector<ResidualNorm> out;
  for (const auto& e : r.equations) {
    ResidualNorm nrm{e.name, 0.0, 0.0};
    if (e.is_vector) {
      nrm.linf = fields::norm(e.vec, Norm::linf, &r.mask);
      nrm.l2 = fields::norm(e.vec, Norm::l2, &r.mask);
    } else {
      nrm.linf = fields::norm(e.sca, Norm::linf, &r.mask);
      nrm.l2 = fields::norm(e.sca, Norm::l2, &r.mask);
    }
    out.push_back(nrm);
  }
  return out;
}

ProbeReport two_grid_check(const CGLState& state, System system, double factor, double floor) {
  if (!(factor > 0.0) || !(floor >= 0.0)) throw ValidationError("probe factor must be > 0 and floor >= 0");
  const ResidualFields rh = residual_fields(state, system, 1);
  const ResidualFields r2h = residual_fields(state, system, 2);
  const Mask mask = fields::crop(rh.mask, rh.grid, 1);

  ProbeReport rep;
  rep.system = system;
  rep.factor = factor;
  rep.floor = floor;
  rep.pass = true;
  for (std::size_t i = 0; i < rh.equations.size(); ++i) {
    const EquationResidual& a = rh.equations[i];
    const EquationResidual& b = r2h.equations[i];
    ProbeEntry e;
    e.name = a.name;
    if (a.is_vector) {
      const VectorGrid ah = fields::crop(a.vec, 1);
      VectorGrid diff = b.vec;
      for (std::size_t n = 0; n < diff.values.size(); ++n) {
        for (std::size_t c = 0; c < 3; ++c) diff.values[n][c] -= ah.values[n][c];
      }
      e.linf_h = fields::norm(ah, Norm::linf, &mask);
      e.l2_h = fields::norm(ah, Norm::l2, &mask);
      e.linf_2h = fields::norm(b.vec, Norm::linf, &mask);
      e.estimate = fields::norm(diff, Norm::linf, &mask) / 3.0;
    } else {
      const ScalarGrid ah = fields::crop(a.sca, 1);
      ScalarGrid diff = b.sca;
      for (std::size_t n = 0; n < diff.values.size(); ++n) diff.values[n] -= ah.values[n];
      e.linf_h = fields::norm(ah, Norm::linf, &mask);
      e.l2_h = fields::norm(ah, Norm::l2, &mask);
      e.linf_2h = fields::norm(b.sca, Norm::linf, &mask);
      e.estimate = fields::norm(diff, Norm::linf, &mask) / 3.0;
    }
    e.threshold = factor * e.estimate + floor;
    e.pass = e.linf_h <= e.threshold;
    rep.pass = rep.pass && e.pass;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace plasmasym::equilibria
