#include "plasmasym/fields/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "plasmasym/error.hpp"

namespace plasmasym::fields {

Grid3 Grid3::cube(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw ValidationError("cube grid needs n >= 2 and hi > lo");
  const double h = (hi - lo) / (n - 1);
  return Grid3{{lo, lo, lo}, {h, h, h}, {n, n, n}};
}

Vec3 Grid3::point(std::size_t flat) const {
  const auto nz = static_cast<std::size_t>(counts[2]);
  const auto ny = static_cast<std::size_t>(counts[1]);
  const int k = static_cast<int>(flat % nz);
  const int j = static_cast<int>((flat / nz) % ny);
  const int i = static_cast<int>(flat / (nz * ny));
  return point(i, j, k);
}

Grid3 Grid3::interior(int margin) const {
  Grid3 g = *this;
  for (int a = 0; a < 3; ++a) {
    g.counts[a] = counts[a] - 2 * margin;
    g.origin[a] = origin[a] + margin * h[a];
  }
  return g;
}

void Grid3::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(h[a] > 0.0) || !std::isfinite(h[a])) throw ValidationError("grid spacing must be positive");
    if (counts[a] < 1) throw ValidationError("grid counts must be positive");
  }
}

ScalarGrid constant(const Grid3& g, double c) { return {g, std::vector<double>(g.size(), c)}; }

namespace {

[[noreturn]] void non_finite(const Grid3& g, std::size_t flat) {
  const Vec3 p = g.point(flat);
  std::ostringstream os;
  os.precision(17);
  os << "non-finite sample at node " << flat << " (" << p[0] << ", " << p[1] << ", " << p[2] << ")";
  throw MathError(os.str());
}

void require_stencil(const Grid3& g, int stride) {
  if (stride < 1) throw ValidationError("stencil stride must be >= 1");
  for (int a = 0; a < 3; ++a) {
    if (g.counts[a] < 2 * stride + 3) {
      throw ValidationError("grid too small for the stencil: need " + std::to_string(2 * stride + 3) +
                            " nodes per axis");
    }
  }
}

// Central difference of component `get` along axis `a` at interior node
// (i,j,k) of the input lattice.
template <class Get>
double central(const Grid3& g, Get get, int a, int i, int j, int k, int s) {
  int ip = i, jp = j, kp = k, im = i, jm = j, km = k;
  (a == 0 ? ip : a == 1 ? jp : kp) += s;
  (a == 0 ? im : a == 1 ? jm : km) -= s;
  return (get(g.index(ip, jp, kp)) - get(g.index(im, jm, km))) / (2.0 * s * g.h[a]);
}

template <class Out, class Fn>
void for_interior(const Grid3& g, int s, Out& out, Fn fn) {
  const Grid3 og = g.interior(s);
  for (int i = 0; i < og.counts[0]; ++i) {
    for (int j = 0; j < og.counts[1]; ++j) {
      for (int k = 0; k < og.counts[2]; ++k) out[og.index(i, j, k)] = fn(i + s, j + s, k + s);
    }
  }
}

}  // namespace

ScalarGrid sample(const std::function<double(const Vec3&)>& f, const Grid3& g) {
  g.validate();
  ScalarGrid out{g, std::vector<double>(g.size())};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double v = f(g.point(n));
    if (!std::isfinite(v)) non_finite(g, n);
    out.values[n] = v;
  }
  return out;
}

VectorGrid sample(const std::function<Vec3(const Vec3&)>& f, const Grid3& g) {
  g.validate();
  VectorGrid out{g, std::vector<Vec3>(g.size())};
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec3 v = f(g.point(n));
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2])) non_finite(g, n);
    out.values[n] = v;
  }
  return out;
}

namespace {

template <class T>
std::vector<T> crop_values(const std::vector<T>& v, const Grid3& g, int margin) {
  if (margin < 0 || 2 * margin >= std::min({g.counts[0], g.counts[1], g.counts[2]})) {
    throw ValidationError("crop margin exceeds the grid");
  }
  const Grid3 og = g.interior(margin);
  std::vector<T> out(og.size());
  for (int i = 0; i < og.counts[0]; ++i) {
    for (int j = 0; j < og.counts[1]; ++j) {
      for (int k = 0; k < og.counts[2]; ++k) {
        out[og.index(i, j, k)] = v[g.index(i + margin, j + margin, k + margin)];
      }
    }
  }
  return out;
}

}  // namespace

ScalarGrid crop(const ScalarGrid& f, int margin) {
  return {f.grid.interior(margin), crop_values(f.values, f.grid, margin)};
}
VectorGrid crop(const VectorGrid& f, int margin) {
  return {f.grid.interior(margin), crop_values(f.values, f.grid, margin)};
}
Mask crop(const Mask& m, const Grid3& g, int margin) { return crop_values(m, g, margin); }

VectorGrid gradient(const ScalarGrid& f, int stride) {
  require_stencil(f.grid, stride);
  const Grid3& g = f.grid;
  VectorGrid out{g.interior(stride), std::vector<Vec3>(g.interior(stride).size())};
  auto get = [&](std::size_t n) { return f.values[n]; };
  for_interior(g, stride, out.values, [&](int i, int j, int k) {
    return Vec3{central(g, get, 0, i, j, k, stride), central(g, get, 1, i, j, k, stride),
                central(g, get, 2, i, j, k, stride)};
  });
  return out;
}

ScalarGrid divergence(const VectorGrid& v, int stride) {
  require_stencil(v.grid, stride);
  const Grid3& g = v.grid;
  ScalarGrid out{g.interior(stride), std::vector<double>(g.interior(stride).size())};
  for_interior(g, stride, out.values, [&](int i, int j, int k) {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) {
      d += central(g, [&](std::size_t n) { return v.values[n][static_cast<std::size_t>(a)]; }, a, i, j, k,
                   stride);
    }
    return d;
  });
  return out;
}

VectorGrid curl(const VectorGrid& v, int stride) {
  require_stencil(v.grid, stride);
  const Grid3& g = v.grid;
  VectorGrid out{g.interior(stride), std::vector<Vec3>(g.interior(stride).size())};
  auto d = [&](int comp, int axis, int i, int j, int k) {
    return central(g, [&](std::size_t n) { return v.values[n][static_cast<std::size_t>(comp)]; }, axis, i,
                   j, k, stride);
  };
  for_interior(g, stride, out.values, [&](int i, int j, int k) {
    return Vec3{d(2, 1, i, j, k) - d(1, 2, i, j, k), d(0, 2, i, j, k) - d(2, 0, i, j, k),
                d(1, 0, i, j, k) - d(0, 1, i, j, k)};
  });
  return out;
}

ScalarGrid directional(const VectorGrid& b, const ScalarGrid& f, int stride) {
  if (!(b.grid == f.grid)) throw ValidationError("directional derivative needs matching grids");
  const VectorGrid gf = gradient(f, stride);
  const VectorGrid bi = crop(b, stride);
  ScalarGrid out{gf.grid, std::vector<double>(gf.values.size())};
  for (std::size_t n = 0; n < out.values.size(); ++n) out.values[n] = dot(bi.values[n], gf.values[n]);
  return out;
}

namespace {

template <class Mag>
double norm_impl(std::size_t size, Mag mag, Norm kind, const Mask* mask) {
  if (mask && mask->size() != size) throw ValidationError("mask size does not match field");
  double mx = 0.0;
  double sq = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < size; ++n) {
    if (mask && !(*mask)[n]) continue;
    const double a = mag(n);
    mx = std::max(mx, a);
    sq += a * a;
    ++count;
  }
  if (count == 0) throw ValidationError("norm of an empty field");
  return kind == Norm::linf ? mx : std::sqrt(sq / static_cast<double>(count));
}

}  // namespace

double norm(const ScalarGrid& f, Norm kind, const Mask* mask) {
  return norm_impl(f.values.size(), [&](std::size_t n) { return std::abs(f.values[n]); }, kind, mask);
}

double norm(const VectorGrid& f, Norm kind, const Mask* mask) {
  return norm_impl(f.values.size(), [&](std::size_t n) { return std::sqrt(dot(f.values[n], f.values[n])); },
                   kind, mask);
}

}  // namespace plasmasym::fields
