#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace plasmasym::fields {

using Vec3 = std::array<double, 3>;

/// Uniform Cartesian node lattice. Node (i,j,k) sits at origin + (i,j,k)*h
/// and has flat index (i*ny + j)*nz + k (z fastest).
struct Grid3 {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 h{1.0, 1.0, 1.0};
  std::array<int, 3> counts{1, 1, 1};

  /// Cube [lo, hi]^3 with `n` nodes per axis.
  static Grid3 cube(double lo, double hi, int n);

  std::size_t size() const {
    return static_cast<std::size_t>(counts[0]) * static_cast<std::size_t>(counts[1]) *
           static_cast<std::size_t>(counts[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(counts[1]) +
            static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(counts[2]) +
           static_cast<std::size_t>(k);
  }
  Vec3 point(int i, int j, int k) const {
    return {origin[0] + i * h[0], origin[1] + j * h[1], origin[2] + k * h[2]};
  }
  Vec3 point(std::size_t flat) const;

  /// The lattice with `margin` nodes removed from every face.
  Grid3 interior(int margin) const;

  /// Throws ValidationError unless spacing > 0 and counts >= 1.
  void validate() const;

  friend bool operator==(const Grid3&, const Grid3&) = default;
};

struct ScalarGrid {
  Grid3 grid;
  std::vector<double> values;

  double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
};

struct VectorGrid {
  Grid3 grid;
  std::vector<Vec3> values;

  Vec3& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  const Vec3& at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
};

/// Node subset selector, one byte per node of the matching grid.
using Mask = std::vector<std::uint8_t>;

ScalarGrid constant(const Grid3& g, double c);

/// values[node] = f(node coordinates). Throws MathError naming the first
/// node with a non-finite sample.
ScalarGrid sample(const std::function<double(const Vec3&)>& f, const Grid3& g);
VectorGrid sample(const std::function<Vec3(const Vec3&)>& f, const Grid3& g);

/// Restriction of a field (or mask) to its `margin`-cropped interior.
ScalarGrid crop(const ScalarGrid& f, int margin);
VectorGrid crop(const VectorGrid& f, int margin);
Mask crop(const Mask& m, const Grid3& g, int margin);

// Second-order central differences. `stride` s uses neighbours at +-s
// (effective spacing s*h); the result lives on the s-cropped interior.
// Inputs need at least 2s+3 nodes per axis (5 for s = 1).
VectorGrid gradient(const ScalarGrid& f, int stride = 1);
ScalarGrid divergence(const VectorGrid& v, int stride = 1);
VectorGrid curl(const VectorGrid& v, int stride = 1);
/// B . grad f, nodewise on the interior.
ScalarGrid directional(const VectorGrid& b, const ScalarGrid& f, int stride = 1);

enum class Norm { linf, l2 };

/// Linf = max |value|; L2 = sqrt(mean of squares). Vectors use the
/// Euclidean magnitude per node. The optional mask selects nodes; an empty
/// selection throws ValidationError.
double norm(const ScalarGrid& f, Norm kind, const Mask* mask = nullptr);
double norm(const VectorGrid& f, Norm kind, const Mask* mask = nullptr);

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace plasmasym::fields
