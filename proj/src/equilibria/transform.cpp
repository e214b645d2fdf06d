#include "plasmasym/equilibria/transform.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plasmasym/error.hpp"

namespace plasmasym::equilibria {

using fields::dot;

namespace {

std::string strip_prefix(std::string_view text) {
  std::string s(text);
  const auto eq = s.find('=');
  if (eq != std::string::npos) {
    std::string head = s.substr(0, eq);
    head.erase(std::remove_if(head.begin(), head.end(), [](unsigned char c) { return std::isspace(c); }),
               head.end());
    if (head != "M") throw ValidationError("transform must read 'M = <expr>' or '<expr>'");
    s = s.substr(eq + 1);
  }
  return s;
}

}  // namespace

TransformSpec::TransformSpec(std::string_view text) : text_(strip_prefix(text)), m_(text_, {"psi"}) {}

double TransformSpec::H(double psi) const {
  const double m = M(psi);
  if (m == 0.0) throw MathError("H undefined where M = 0");
  return std::log(std::abs(m));
}

TransformSpec TransformSpec::compose(const TransformSpec& other) const {
  return TransformSpec("(" + text_ + ")*(" + other.text_ + ")");
}

TransformSpec TransformSpec::inverse() const { return TransformSpec("1/(" + text_ + ")"); }

PointState apply_infinite_transform(const PointState& p, double M) {
  if (p.B[0] == 0.0 && p.B[1] == 0.0 && p.B[2] == 0.0) return p;
  PointState q = p;
  const double b2 = dot(p.B, p.B);
  for (std::size_t a = 0; a < 3; ++a) q.B[a] = M * p.B[a];
  const double b12 = dot(q.B, q.B);
  const double m2 = M * M;
  // Written so that M = 1 reproduces every field bit for bit.
  q.tau = (m2 - 1.0 + p.tau) / m2;
  q.p_perp = p.p_perp + (b2 - b12) / 2.0;
  q.p_par = p.p_par + (q.p_perp - p.p_perp) + (q.tau * b12 - p.tau * b2);
  return q;
}

CGLState apply_infinite_transform(const CGLState& state, const TransformSpec& spec, double m_min) {
  state.validate();
  if (!(m_min > 0.0)) throw ValidationError("m_min must be positive");
  CGLState out = state;
  for (std::size_t n = 0; n < state.grid().size(); ++n) {
    const double psi = state.psi.values[n];
    const double M = spec.M(psi);
    if (!std::isfinite(M) || std::abs(M) < m_min) {
      std::ostringstream os;
      os.precision(17);
      os << "|M(psi)| < " << m_min << " at psi = " << psi << " (M = " << M << ")";
      throw ValidationError(os.str());
    }
    PointState p{state.B.values[n], state.p_perp.values[n], state.p_par.values[n], state.tau.values[n], psi};
    const PointState q = apply_infinite_transform(p, M);
    out.B.values[n] = q.B;
    out.p_perp.values[n] = q.p_perp;
    out.p_par.values[n] = q.p_par;
    out.tau.values[n] = q.tau;
  }
  out.provenance = state.provenance + " | transform M = " + spec.text();
  return out;
}

Mat3 euler_matrix(const Rotate& r) {
  auto d = [](double a) {
    return Mat3{{{std::cos(a), std::sin(a), 0.0}, {-std::sin(a), std::cos(a), 0.0}, {0.0, 0.0, 1.0}}};
  };
  const Mat3 c{{{1.0, 0.0, 0.0},
                {0.0, std::cos(r.theta), std::sin(r.theta)},
                {0.0, -std::sin(r.theta), std::cos(r.theta)}}};
  auto mul = [](const Mat3& a, const Mat3& b) {
    Mat3 m{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) m[i][j] += a[i][k] * b[k][j];
      }
    }
    return m;
  };
  return mul(mul(d(r.phi), c), d(r.psi));
}

namespace {

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

Vec3 mat_t_vec(const Mat3& m, const Vec3& v) {
  return {m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2], m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
          m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2]};
}

void validate_op(const PointSymmetry& op) {
  if (const auto* s = std::get_if<Scale>(&op)) {
    if (!(s->t > 0.0) || !std::isfinite(s->t) || !std::isfinite(s->s)) {
      throw ValidationError("scale needs t > 0 and finite s");
    }
  }
  if (const auto* s = std::get_if<Scale3>(&op)) {
    if (!(s->C > 0.0) || !std::isfinite(s->C)) {
      throw ValidationError("scale3 needs C > 0 (C <= 0 breaks tau < 1 preservation)");
    }
  }
}

// Field values at the image point, given values at the preimage.
PointState map_values(const PointState& p, const PointSymmetry& op, const Mat3* q) {
  PointState r = p;
  if (const auto* t = std::get_if<Translate>(&op)) {
    r.p_perp += t->K4 * t->eps;
    r.p_par += t->K4 * t->eps;
  } else if (std::holds_alternative<Rotate>(op)) {
    r.B = mat_vec(*q, p.B);
  } else if (const auto* s = std::get_if<Scale>(&op)) {
    for (std::size_t a = 0; a < 3; ++a) r.B[a] = s->s * p.B[a];
    r.p_perp = (s->squared ? s->s * s->s : 2.0 * s->s) * p.p_perp;
    r.p_par = r.p_perp + s->s * s->s * (p.p_par - p.p_perp);
  } else if (const auto* c = std::get_if<Scale3>(&op)) {
    const double half_b2 = 0.5 * dot(p.B, p.B);
    r.p_perp = c->C * (p.p_perp + half_b2) - half_b2;
    r.tau = 1.0 - c->C * (1.0 - p.tau);
    r.p_par = r.p_perp + r.tau * 2.0 * half_b2;
  }
  return r;
}

std::string describe(const PointSymmetry& op) {
  std::ostringstream os;
  os.precision(17);
  if (const auto* t = std::get_if<Translate>(&op)) {
    os << "translate(" << t->K1 << "," << t->K2 << "," << t->K3 << "," << t->K4 << ";eps=" << t->eps << ")";
  } else if (const auto* r = std::get_if<Rotate>(&op)) {
    os << "rotate(" << r->phi << "," << r->theta << "," << r->psi << ")";
  } else if (const auto* s = std::get_if<Scale>(&op)) {
    os << "scale(t=" << s->t << ",s=" << s->s << (s->squared ? ",squared" : ",literal") << ")";
  } else {
    os << "scale3(C=" << std::get<Scale3>(op).C << ")";
  }
  return os.str();
}

}  // namespace

AnalyticState apply_point_symmetry(const AnalyticState& state, const PointSymmetry& op) {
  validate_op(op);
  const Mat3 q = std::holds_alternative<Rotate>(op) ? euler_matrix(std::get<Rotate>(op)) : Mat3{};

  // Preimage of a point and of a grid under the coordinate map.
  auto pre_point = [op, q](const Vec3& x) -> Vec3 {
    if (const auto* t = std::get_if<Translate>(&op)) {
      return {x[0] - t->K1 * t->eps, x[1] - t->K2 * t->eps, x[2] - t->K3 * t->eps};
    }
    if (std::holds_alternative<Rotate>(op)) return mat_t_vec(q, x);
    if (const auto* s = std::get_if<Scale>(&op)) return {x[0] / s->t, x[1] / s->t, x[2] / s->t};
    return x;
  };
  auto pre_grid = [op, pre_point](const Grid3& g) {
    Grid3 p = g;
    if (std::holds_alternative<Translate>(op)) p.origin = pre_point(g.origin);
    if (const auto* s = std::get_if<Scale>(&op)) {
      p.origin = pre_point(g.origin);
      for (auto& h : p.h) h /= s->t;
    }
    return p;
  };

  AnalyticState out;
  out.at = [inner = state.at, op, q, pre_point](const Vec3& x) { return map_values(inner(pre_point(x)), op, &q); };
  if (state.active) {
    out.active = [inner = state.active, pre_point, pre_grid](const Vec3& x, const Grid3& g) {
      return inner(pre_point(x), pre_grid(g));
    };
  }
  out.provenance = state.provenance + " | " + describe(op);
  return out;
}

namespace {

CGLState map_all_values(const CGLState& state, const PointSymmetry& op) {
  CGLState out = state;
  for (std::size_t n = 0; n < state.grid().size(); ++n) {
    const PointState p{state.B.values[n], state.p_perp.values[n], state.p_par.values[n], state.tau.values[n],
                       state.psi.values[n]};
    const PointState r = map_values(p, op, nullptr);
    out.B.values[n] = r.B;
    out.p_perp.values[n] = r.p_perp;
    out.p_par.values[n] = r.p_par;
    out.tau.values[n] = r.tau;
  }
  return out;
}

void set_grid(CGLState& s, const Grid3& g) {
  s.B.grid = g;
  for (auto* f : {&s.p_perp, &s.p_par, &s.tau, &s.psi}) f->grid = g;
}

CGLState rotate_sampled(const CGLState& state, const Rotate& r) {
  const Mat3 q = euler_matrix(r);
  const Grid3& g = state.grid();
  CGLState out = state;
  out.active.assign(g.size(), 1);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 y = mat_t_vec(q, g.point(n));
    std::array<int, 3> i0{};
    Vec3 w{};
    bool inside = true;
    for (std::size_t a = 0; a < 3; ++a) {
      const int cnt = g.counts[a];
      double f = (y[a] - g.origin[a]) / g.h[a];
      if (f < -1e-9 || f > cnt - 1 + 1e-9) inside = false;
      f = std::clamp(f, 0.0, static_cast<double>(cnt - 1));
      i0[a] = cnt > 1 ? std::min(static_cast<int>(std::floor(f)), cnt - 2) : 0;
      w[a] = cnt > 1 ? f - i0[a] : 0.0;
    }
    PointState acc;
    acc.B = {0.0, 0.0, 0.0};
    bool corners_active = true;
    for (int c = 0; c < 8; ++c) {
      const int di = c & 1, dj = (c >> 1) & 1, dk = (c >> 2) & 1;
      const double wt = (di ? w[0] : 1 - w[0]) * (dj ? w[1] : 1 - w[1]) * (dk ? w[2] : 1 - w[2]);
      if (wt == 0.0) continue;
      const std::size_t m = g.index(i0[0] + di, i0[1] + dj, i0[2] + dk);
      for (std::size_t a = 0; a < 3; ++a) acc.B[a] += wt * state.B.values[m][a];
      acc.p_perp += wt * state.p_perp.values[m];
      acc.p_par += wt * state.p_par.values[m];
      acc.tau += wt * state.tau.values[m];
      acc.psi += wt * state.psi.values[m];
      corners_active = corners_active && state.is_active(m);
    }
    out.B.values[n] = mat_vec(q, acc.B);
    out.p_perp.values[n] = acc.p_perp;
    out.p_par.values[n] = acc.p_par;
    out.tau.values[n] = acc.tau;
    out.psi.values[n] = acc.psi;
    out.active[n] = inside && corners_active ? 1 : 0;
  }
  return out;
}

}  // namespace

CGLState apply_point_symmetry(const CGLState& state, const PointSymmetry& op) {
  state.validate();
  validate_op(op);
  CGLState out;
  if (const auto* r = std::get_if<Rotate>(&op)) {
    out = rotate_sampled(state, *r);
    out.provenance = state.provenance + " | " + describe(op) + " lossy:trilinear";
    return out;
  }
  out = map_all_values(state, op);
  Grid3 g = state.grid();
  if (const auto* t = std::get_if<Translate>(&op)) {
    g.origin = {g.origin[0] + t->K1 * t->eps, g.origin[1] + t->K2 * t->eps, g.origin[2] + t->K3 * t->eps};
  } else if (const auto* s = std::get_if<Scale>(&op)) {
    for (std::size_t a = 0; a < 3; ++a) {
      g.origin[a] *= s->t;
      g.h[a] *= s->t;
    }
  }
  set_grid(out, g);
  out.provenance = state.provenance + " | " + describe(op);
  return out;
}

}  // namespace plasmasym::equilibria
