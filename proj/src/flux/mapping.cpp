#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plasmasym/error.hpp"
#include "plasmasym/flux/flux.hpp"

namespace plasmasym::flux {

namespace {

using boost::math::interpolators::cardinal_cubic_b_spline;
using fields::Vec3;

// Third-order one-sided derivative estimates at both ends of uniform data.
std::pair<double, double> end_slopes(const double* f, std::size_t n, double h) {
  const double l = (-11.0 * f[0] + 18.0 * f[1] - 9.0 * f[2] + 2.0 * f[3]) / (6.0 * h);
  const double r = (11.0 * f[n - 1] - 18.0 * f[n - 2] + 9.0 * f[n - 3] - 2.0 * f[n - 4]) / (6.0 * h);
  return {l, r};
}

cardinal_cubic_b_spline<double> make_spline(const double* f, std::size_t n, double t0, double h) {
  const auto [l, r] = end_slopes(f, n, h);
  return cardinal_cubic_b_spline<double>(f, n, t0, h, l, r);
}

struct Sample {
  double psi, psi_r, psi_u;
};

// Tensor-product cubic B-spline: one spline along u per r row, then a
// spline across rows built on demand for a fixed u.
class FluxInterpolant {
 public:
  explicit FluxInterpolant(const FluxSolution& sol) : g_(sol.grid()) {
    rows_.reserve(static_cast<std::size_t>(g_.nr));
    for (int i = 0; i < g_.nr; ++i) {
      const double* row = sol.psi.data() + g_.index(i, 0);
      rows_.push_back(make_spline(row, static_cast<std::size_t>(g_.nu), g_.a, g_.hu()));
    }
  }

  struct Column {
    cardinal_cubic_b_spline<double> psi;
    cardinal_cubic_b_spline<double> du;
  };

  Column column(double u) const {
    std::vector<double> v(static_cast<std::size_t>(g_.nr));
    std::vector<double> d(static_cast<std::size_t>(g_.nr));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      v[i] = rows_[i](u);
      d[i] = rows_[i].prime(u);
    }
    return {make_spline(v.data(), v.size(), g_.r0, g_.hr()), make_spline(d.data(), d.size(), g_.r0, g_.hr())};
  }

  static Sample eval(const Column& c, double r) { return {c.psi(r), c.psi.prime(r), c.du(r)}; }

 private:
  Grid2 g_;
  std::vector<cardinal_cubic_b_spline<double>> rows_;
};

// N(psi) = N_ref + integral of N' from psi_ref, tabulated on the attained
// range and completed per call by a fixed Gauss rule inside one panel.
class PressureProfile {
 public:
  PressureProfile(const expr::ScalarFunction& np, double lo, double hi, double psi_ref, double n_ref)
      : np_(np), lo_(lo), step_((hi - lo) / kPanels) {
    auto f = [this](double x) { return np_(x); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    table_.resize(kPanels + 1);
    table_[0] = n_ref + (lo == psi_ref ? 0.0 : GK::integrate(f, psi_ref, lo, 10, 1e-12));
    for (int k = 0; k < kPanels; ++k) {
      const double a = lo + k * step_;
      table_[static_cast<std::size_t>(k) + 1] =
          table_[static_cast<std::size_t>(k)] + (step_ > 0 ? GK::integrate(f, a, a + step_, 6, 1e-12) : 0.0);
    }
  }

  double operator()(double psi) const {
    int k = step_ > 0 ? static_cast<int>(std::lround((psi - lo_) / step_)) : 0;
    k = std::clamp(k, 0, kPanels);
    const double a = lo_ + k * step_;
    auto f = [this](double x) { return np_(x); };
    return table_[static_cast<std::size_t>(k)] + boost::math::quadrature::gauss<double, 10>::integrate(f, a, psi);
  }

 private:
  static constexpr int kPanels = 256;
  const expr::ScalarFunction& np_;
  double lo_;
  double step_;
  std::vector<double> table_;
};

}  // namespace

CGLState flux_to_cgl(const FluxSolution& sol, std::string_view tau_text, const CartesianOptions& opts) {
  const FluxProblem& p = sol.problem;
  p.validate();
  const Grid2& g = p.grid;
  if (sol.psi.size() != g.size()) throw ValidationError("solution size does not match its grid");
  if (opts.n < 2 * opts.margin + 3) throw ValidationError("Cartesian resolution too small for the margin");
  if (opts.margin < 0) throw ValidationError("margin must be >= 0");

  const expr::ScalarFunction tau(tau_text, {"psi", "psi_min", "psi_max"});
  const auto [mn, mx] = std::minmax_element(sol.psi.begin(), sol.psi.end());
  const double psi_min = *mn;
  const double psi_max = *mx;
  const double psi_abs = std::max(std::abs(psi_min), std::abs(psi_max));
  if (!(psi_abs > 0.0)) throw ValidationError("flux function vanishes identically; Psi undefined");
  auto tau_at = [&](double psi) {
    const double args[3] = {psi, psi_min, psi_max};
    const double t = tau(std::span<const double>(args, 3));
    if (!std::isfinite(t) || !(t < 1.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "tau >= 1 attained: tau(" << psi << ") = " << t;
      throw ValidationError(os.str());
    }
    return t;
  };
  for (double v : sol.psi) tau_at(v);

  const PressureProfile N(p.N_prime, psi_min, psi_max, p.psi_ref.value_or(psi_min), p.N_ref);
  const FluxInterpolant interp(sol);

  // Cartesian box around the flux domain.
  const bool helical = p.geometry == Geometry::helical;
  const double zlo = opts.z_min.value_or(g.a);
  const double zhi = opts.z_max.value_or(g.b);
  if (!(zhi > zlo)) throw ValidationError("z_max must exceed z_min");
  fields::Grid3 box;
  const double h = 2.0 * g.r1 / (opts.n - 1);
  const int nz = std::max(2 * opts.margin + 3, static_cast<int>(std::lround((zhi - zlo) / h)) + 1);
  box.origin = {-g.r1, -g.r1, zlo};
  box.h = {h, h, (zhi - zlo) / (nz - 1)};
  box.counts = {opts.n, opts.n, nz};

  const double period = 2.0 * std::numbers::pi * std::abs(p.gamma);
  const bool periodic = helical && period > 0 && std::abs((g.b - g.a) - period) <= 1e-9 * period;
  if (!(opts.inset >= 0.0)) throw ValidationError("inset must be >= 0");
  const double mr = std::max(opts.margin * h, opts.inset);
  const double mz = std::max(opts.margin * box.h[2], opts.inset);

  CGLState s;
  s.B = {box, std::vector<Vec3>(box.size())};
  s.p_perp = fields::constant(box, 0.0);
  s.p_par = fields::constant(box, 0.0);
  s.tau = fields::constant(box, 0.0);
  s.psi = fields::constant(box, 0.0);
  s.active.assign(box.size(), 0);

  auto fill = [&](std::size_t n, double x, double y, double rc, const Sample& smp, bool active) {
    const double t = tau_at(smp.psi);
    const double f = 1.0 / std::sqrt(1.0 - t);
    const double j = p.J(smp.psi);
    double br = 0.0;
    double bphi = 0.0;
    double bz = 0.0;
    if (!helical) {
      br = smp.psi_u / rc;
      bphi = j / rc;
      bz = -smp.psi_r / rc;
    } else {
      const double q = rc * rc + p.gamma * p.gamma;
      br = smp.psi_u / rc;
      bz = (p.gamma * j - rc * smp.psi_r) / q;
      bphi = (rc * j + p.gamma * smp.psi_r) / q;
    }
    const double r = std::hypot(x, y);
    const double c = r > 0 ? x / r : 1.0;
    const double sn = r > 0 ? y / r : 0.0;
    const Vec3 B{f * (br * c - bphi * sn), f * (br * sn + bphi * c), f * bz};
    const double b2 = B[0] * B[0] + B[1] * B[1] + B[2] * B[2];
    const double nv = N(smp.psi);
    s.B.values[n] = B;
    s.p_perp.values[n] = nv - t * b2 / 2.0;
    s.p_par.values[n] = nv + t * b2 / 2.0;
    s.tau.values[n] = t;
    s.psi.values[n] = smp.psi / psi_abs;
    s.active[n] = active ? 1 : 0;
    for (double v : {B[0], B[1], B[2], s.p_perp.values[n], s.p_par.values[n]}) {
      if (!std::isfinite(v)) throw MathError("non-finite mapped value at node " + std::to_string(n));
    }
  };

  if (!helical) {
    for (int k = 0; k < nz; ++k) {
      const double z = box.origin[2] + k * box.h[2];
      const auto col = interp.column(std::clamp(z, g.a, g.b));
      const bool z_ok = z >= g.a + mz && z <= g.b - mz;
      for (int i = 0; i < opts.n; ++i) {
        for (int j = 0; j < opts.n; ++j) {
          const Vec3 pt = box.point(i, j, k);
          const double r = std::hypot(pt[0], pt[1]);
          const double rc = std::clamp(r, g.r0, g.r1);
          const bool ok = z_ok && r >= g.r0 + mr && r <= g.r1 - mr;
          fill(box.index(i, j, k), pt[0], pt[1], rc, FluxInterpolant::eval(col, rc), ok);
        }
      }
    }
  } else {
    for (std::size_t n = 0; n < box.size(); ++n) {
      const Vec3 pt = box.point(n);
      const double r = std::hypot(pt[0], pt[1]);
      const double rc = std::clamp(r, g.r0, g.r1);
      const double phi = std::atan2(pt[1], pt[0]);
      double u = pt[2] - p.gamma * phi;
      // Pick the branch of phi that lands u in [a, a + period).
      if (period > 0) u = g.a + std::fmod(std::fmod(u - g.a, period) + period, period);
      bool ok = r >= g.r0 + mr && r <= g.r1 - mr;
      if (!periodic) {
        const double mu =
            std::max(opts.margin * 1.5 * (box.h[2] + std::abs(p.gamma) * h / std::max(rc, 1e-300)), opts.inset);
        ok = ok && u >= g.a + mu && u <= g.b - mu;
      }
      const double uc = std::clamp(u, g.a, g.b);
      fill(n, pt[0], pt[1], rc, FluxInterpolant::eval(interp.column(uc), rc), ok);
    }
  }

  std::ostringstream os;
  os << "flux_to_cgl geometry=" << geometry_name(p.geometry) << " tau=" << tau.text() << " n=" << opts.n;
  s.provenance = os.str();
  return s;
}

}  // namespace plasmasym::flux
