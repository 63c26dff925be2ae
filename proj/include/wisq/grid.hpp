#pragma once

// Axis-parallel cubes, midpoint grids, sampled functions and midpoint quadrature.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "wisq/error.hpp"

namespace wisq {

inline constexpr int kMaxDim = 2;

/// A point of R^n, n <= 2. Unused coordinates are kept at zero.
using Point = std::array<double, kMaxDim>;

inline double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

/// Axis-parallel cube Q(center, side).
struct Cube {
  Point center{};
  double side = 1.0;
  int dim = 1;

  Cube() = default;
  Cube(Point c, double s, int n) : center(c), side(s), dim(n) {
    require(n >= 1 && n <= kMaxDim, "cube dimension must be 1 or 2");
    require(s > 0.0 && std::isfinite(s), "cube side must be positive");
  }

  /// Interval [lo, hi] in one dimension.
  static Cube interval(double lo, double hi) { return Cube({0.5 * (lo + hi), 0.0}, hi - lo, 1); }

  double lo(int k) const { return center[k] - 0.5 * side; }
  double hi(int k) const { return center[k] + 0.5 * side; }
  double volume() const { return std::pow(side, dim); }

  /// lambda*Q: same center, side multiplied by lambda.
  Cube dilate(double lambda) const { return Cube(center, side * lambda, dim); }

  bool contains(const Point& x, double slack = 0.0) const {
    for (int k = 0; k < dim; ++k) {
      if (x[k] < lo(k) - slack || x[k] > hi(k) + slack) return false;
    }
    return true;
  }

  bool contains(const Cube& other, double rel_slack = 1e-12) const {
    const double slack = rel_slack * std::max(side, other.side);
    for (int k = 0; k < dim; ++k) {
      if (other.lo(k) < lo(k) - slack || other.hi(k) > hi(k) + slack) return false;
    }
    return true;
  }

  /// Euclidean distance from x to the cube (0 inside).
  double distance_to(const Point& x) const {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double d = std::max({lo(k) - x[k], 0.0, x[k] - hi(k)});
      s += d * d;
    }
    return std::sqrt(s);
  }

  bool operator==(const Cube&) const = default;
};

/// Midpoint grid over a cube: points_per_axis cells per axis, points at cell centers.
class Grid {
 public:
  Grid() = default;

  const Cube& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  int points_per_axis() const { return m_; }
  double spacing() const { return h_; }
  double cell_volume() const { return std::pow(h_, dim()); }
  std::size_t size() const { return dim() == 1 ? std::size_t(m_) : std::size_t(m_) * std::size_t(m_); }

  /// Coordinate of cell center i along axis k. Symmetric grids give exactly symmetric coordinates.
  double coordinate(int k, int i) const { return domain_.center[k] + (double(i) + 0.5 - 0.5 * m_) * h_; }
  /// Left edge of cell i along axis k.
  double edge(int k, int i) const { return domain_.center[k] + (double(i) - 0.5 * m_) * h_; }

  Point point(std::size_t idx) const {
    Point x{};
    const int i0 = int(idx % std::size_t(m_));
    x[0] = coordinate(0, i0);
    if (dim() == 2) x[1] = coordinate(1, int(idx / std::size_t(m_)));
    return x;
  }

  std::size_t index(int i0, int i1 = 0) const { return std::size_t(i0) + std::size_t(m_) * std::size_t(i1); }

  Cube cell(std::size_t idx) const { return Cube(point(idx), h_, dim()); }

  bool operator==(const Grid& o) const { return domain_ == o.domain_ && m_ == o.m_; }

  friend Grid make_grid(const Cube& domain, int points_per_axis);

 private:
  Cube domain_;
  int m_ = 0;
  double h_ = 0.0;
};

inline Grid make_grid(const Cube& domain, int points_per_axis) {
  if (points_per_axis <= 0) throw InvalidArgument("grid resolution must be positive");
  if (points_per_axis < 2) throw InvalidArgument("grid needs at least 2 points per axis");
  if (domain.dim < 1 || domain.dim > kMaxDim) throw InvalidArgument("only dimensions 1 and 2 are supported");
  Grid g;
  g.domain_ = domain;
  g.m_ = points_per_axis;
  g.h_ = domain.side / points_per_axis;
  return g;
}

/// Values of a real function at the points of a grid.
struct SampledFunction {
  Grid grid;
  std::vector<double> values;

  SampledFunction() = default;
  SampledFunction(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    require(values.size() == grid.size(), "sampled function size does not match its grid");
    for (double x : values) require(std::isfinite(x), "sampled function values must be finite");
  }

  static SampledFunction zeros(const Grid& g) { return SampledFunction(g, std::vector<double>(g.size(), 0.0)); }

  static SampledFunction sample(const Grid& g, const std::function<double(const Point&)>& fn) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.point(i));
    return SampledFunction(g, std::move(v));
  }

  int dim() const { return grid.dim(); }

  SampledFunction scaled(double c) const {
    SampledFunction out = *this;
    for (double& x : out.values) x *= c;
    return out;
  }
};

/// Midpoint-rule integral of f over the grid points lying in region.
inline double integrate(const SampledFunction& f, const Cube& region) {
  const Grid& g = f.grid;
  if (region.dim != g.dim()) throw InvalidArgument("region dimension mismatch");
  if (!g.domain().contains(region)) throw DomainError("integration region escapes the grid domain");
  const double slack = 1e-12 * g.spacing();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (region.contains(g.point(i), slack)) sum += f.values[i];
  }
  return sum * g.cell_volume();
}

}  // namespace wisq
