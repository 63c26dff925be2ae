#pragma once

// Muckenhoupt weights: representation, weighted measures, A_p / A_1 constants
// over finite cube families, critical index and doubling ratios.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wisq/error.hpp"
#include "wisq/grid.hpp"

namespace wisq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// \int_lo^hi |x|^a dx, possibly infinite.
inline double power_integral_1d(double a, double lo, double hi) {
  if (hi <= lo) return 0.0;
  const bool straddles = lo < 0.0 && hi > 0.0;
  if (a <= -1.0 && (straddles || lo == 0.0 || hi == 0.0)) return kInf;
  const auto anti = [a](double u) {
    if (a == -1.0) return std::log(std::abs(u));
    return std::copysign(std::pow(std::abs(u), a + 1.0) / (a + 1.0), u);
  };
  if (a == -1.0) {
    // Interval on one side of the origin.
    return std::abs(anti(hi) - anti(lo));
  }
  return anti(hi) - anti(lo);
}

// \int_0^m (1 + s^2)^{a/2} ds.
inline double slope_integral(double a, double m) {
  if (m <= 0.0) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [a](double s) { return std::pow(1.0 + s * s, 0.5 * a); };
  if (m <= 2.0) return gauss_kronrod<double, 31>::integrate(f, 0.0, m, 8, 1e-14);
  double sum = gauss_kronrod<double, 31>::integrate(f, 0.0, 2.0, 8, 1e-14);
  // s >= 2: (1 + s^2)^{a/2} = sum_k binom(a/2, k) s^{a - 2k}, integrated termwise; terms shrink like 4^{-k}.
  const double inv_m2 = 1.0 / (m * m);
  double coef = 1.0, pm = std::pow(m, a + 1.0), p2 = std::pow(2.0, a + 1.0);
  for (int k = 0; k < 200; ++k) {
    const double e = a + 1.0 - 2.0 * k;
    const double term = coef * (e == 0.0 ? std::log(m / 2.0) : (pm - p2) / e);
    sum += term;
    if (k > 2 && std::abs(term) < 1e-17 * std::abs(sum)) break;
    coef *= (0.5 * a - k) / (k + 1.0);
    pm *= inv_m2;
    p2 *= 0.25;
  }
  return sum;
}

// \int_0^X \int_0^Y (x^2 + y^2)^{a/2} dy dx for X, Y >= 0, a > -2.
inline double power_rectangle_anchored(double a, double X, double Y) {
  if (X <= 0.0 || Y <= 0.0) return 0.0;
  const double k = a + 2.0;
  return (std::pow(X, k) * slope_integral(a, Y / X) + std::pow(Y, k) * slope_integral(a, X / Y)) / k;
}

inline double power_rectangle(double a, double x1, double x2, double y1, double y2) {
  if (a <= -2.0) {
    const bool hits = x1 <= 0.0 && x2 >= 0.0 && y1 <= 0.0 && y2 >= 0.0;
    if (hits) return kInf;
  }
  const auto signed_f = [a](double X, double Y) {
    const double s = (X < 0 ? -1.0 : 1.0) * (Y < 0 ? -1.0 : 1.0);
    return s * power_rectangle_anchored(a, std::abs(X), std::abs(Y));
  };
  return signed_f(x2, y2) - signed_f(x1, y2) - signed_f(x2, y1) + signed_f(x1, y1);
}

}  // namespace detail

/// Nonnegative locally integrable weight: constant, power |x - c|^a, or tabulated (piecewise constant on cells).
class Weight {
 public:
  enum class Kind { constant, power, tabulated };

  static Weight constant(double value, int dim = 1) {
    require(value > 0.0 && std::isfinite(value), "constant weight must be positive");
    require(dim >= 1 && dim <= kMaxDim, "weight dimension must be 1 or 2");
    Weight w;
    w.kind_ = Kind::constant;
    w.value_ = value;
    w.dim_ = dim;
    return w;
  }

  static Weight power(double exponent, Point center = {}, int dim = 1) {
    require(dim >= 1 && dim <= kMaxDim, "weight dimension must be 1 or 2");
    require(exponent > -dim, "power weight exponent must exceed -n for local integrability");
    return power_unchecked(exponent, center, dim);
  }

  static Weight tabulated(SampledFunction table) {
    bool any = false;
    for (double v : table.values) {
      require(v >= 0.0, "tabulated weight must be nonnegative");
      any = any || v > 0.0;
    }
    require(any, "tabulated weight must not vanish identically");
    Weight w;
    w.kind_ = Kind::tabulated;
    w.dim_ = table.dim();
    w.table_ = std::move(table);
    return w;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double exponent() const { return exponent_; }
  double value() const { return value_; }
  const Point& center() const { return center_; }
  const SampledFunction& table() const { return table_; }

  double operator()(const Point& x) const {
    switch (kind_) {
      case Kind::constant:
        return value_;
      case Kind::power: {
        const double r = distance(x, center_, dim_);
        return std::pow(r, exponent_);
      }
      case Kind::tabulated:
        return table_.values[table_cell(x)];
    }
    return 0.0;
  }

  /// w^e as a weight of the same kind; may fail to be locally integrable (integrals then return +inf).
  Weight pow(double e) const {
    switch (kind_) {
      case Kind::constant:
        return constant(std::pow(value_, e), dim_);
      case Kind::power:
        return power_unchecked(exponent_ * e, center_, dim_);
      case Kind::tabulated: {
        Weight w = *this;
        for (double& v : w.table_.values) v = (v == 0.0 && e < 0.0) ? kInf : std::pow(v, e);
        return w;
      }
    }
    return *this;
  }

  /// w(E) = \int_E w. Closed form for constant and 1D power weights, exact piecewise for tabulated.
  double integral(const Cube& e) const {
    require(e.dim == dim_, "cube dimension does not match weight");
    switch (kind_) {
      case Kind::constant:
        return value_ * e.volume();
      case Kind::power:
        if (dim_ == 1) return detail::power_integral_1d(exponent_, e.lo(0) - center_[0], e.hi(0) - center_[0]);
        return detail::power_rectangle(exponent_, e.lo(0) - center_[0], e.hi(0) - center_[0], e.lo(1) - center_[1],
                                       e.hi(1) - center_[1]);
      case Kind::tabulated:
        return tabulated_integral(e);
    }
    return 0.0;
  }

  /// Exact weighted mass of every cell of a grid.
  std::vector<double> cell_masses(const Grid& g) const {
    std::vector<double> m(g.size());
    if (kind_ == Kind::constant) {
      std::fill(m.begin(), m.end(), value_ * g.cell_volume());
      return m;
    }
    if (kind_ == Kind::power && dim_ == 1) {
      // Shared edges keep the masses additive.
      const int n = g.points_per_axis();
      std::vector<double> edges(std::size_t(n) + 1);
      for (int i = 0; i <= n; ++i) edges[i] = g.edge(0, i) - center_[0];
      for (int i = 0; i < n; ++i) m[i] = detail::power_integral_1d(exponent_, edges[i], edges[i + 1]);
      return m;
    }
    for (std::size_t i = 0; i < g.size(); ++i) m[i] = integral(g.cell(i));
    return m;
  }

  /// Minimum of w over points_per_axis^n midpoints of the cube (ess-inf surrogate).
  double grid_min(const Cube& q, int points_per_axis) const {
    const Grid g = make_grid(q, points_per_axis);
    if (kind_ == Kind::constant) return value_;
    if (kind_ == Kind::power) {
      // Radial and monotone: the extremal node is the nearest one (a > 0) or a farthest one (a < 0), per axis.
      int idx[kMaxDim] = {0, 0};
      const int last = points_per_axis - 1;
      for (int k = 0; k < dim_; ++k) {
        const double first = g.edge(k, 0) + 0.5 * g.spacing();
        const double pos = (center_[k] - first) / g.spacing();
        idx[k] = exponent_ > 0 ? int(std::clamp(std::round(pos), 0.0, double(last))) : (pos >= 0.5 * last ? 0 : last);
      }
      const Point x = g.point(g.index(idx[0], idx[1]));
      return (*this)(x);
    }
    double mn = kInf;
    for (std::size_t i = 0; i < g.size(); ++i) mn = std::min(mn, (*this)(g.point(i)));
    return mn;
  }

 private:
  static Weight power_unchecked(double exponent, Point center, int dim) {
    Weight w;
    w.kind_ = Kind::power;
    w.exponent_ = exponent;
    w.center_ = center;
    w.dim_ = dim;
    return w;
  }

  std::size_t table_cell(const Point& x) const {
    const Grid& g = table_.grid;
    int idx[kMaxDim] = {0, 0};
    for (int k = 0; k < dim_; ++k) {
      const int i = int(std::floor((x[k] - g.edge(k, 0)) / g.spacing()));
      if (i < 0 || i >= g.points_per_axis()) throw DomainError("point outside the tabulated weight's domain");
      idx[k] = i;
    }
    return g.index(idx[0], idx[1]);
  }

  double tabulated_integral(const Cube& e) const {
    const Grid& g = table_.grid;
    if (!g.domain().contains(e)) throw DomainError("cube escapes the tabulated weight's domain");
    const double h = g.spacing();
    int lo[kMaxDim] = {0, 0}, hi[kMaxDim] = {0, 0};
    for (int k = 0; k < dim_; ++k) {
      lo[k] = std::max(0, int(std::floor((e.lo(k) - g.edge(k, 0)) / h)));
      hi[k] = std::min(g.points_per_axis() - 1, int(std::floor((e.hi(k) - g.edge(k, 0)) / h)));
    }
    const auto overlap = [&](int k, int i) {
      return std::max(0.0, std::min(e.hi(k), g.edge(k, i + 1)) - std::max(e.lo(k), g.edge(k, i)));
    };
    double sum = 0.0;
    for (int j = lo[1]; j <= hi[1]; ++j) {
      const double oy = dim_ == 2 ? overlap(1, j) : 1.0;
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const double o = overlap(0, i) * oy;
        if (o > 0.0) sum += o * table_.values[g.index(i, j)];
      }
    }
    return sum;
  }

  Kind kind_ = Kind::constant;
  double value_ = 1.0;
  double exponent_ = 0.0;
  Point center_{};
  int dim_ = 1;
  SampledFunction table_;
};

inline double weighted_measure(const Weight& w, const Cube& e) { return w.integral(e); }

/// Finite surrogate for "every cube": dyadic scales x lattice translates x anchored cubes.
struct CubeFamily {
  Cube domain;
  std::vector<Cube> cubes;
};

struct CubeFamilyOptions {
  double min_side = 0.0;  // 0 means domain side / 64
  double max_side = 0.0;  // 0 means domain side
  int scales_per_octave = 1;
  int translates_per_side = 2;
  std::vector<Point> anchors;  // cubes with these points as corner or center (e.g. weight singularities)
};

inline CubeFamily make_cube_family(const Cube& domain, const CubeFamilyOptions& opt) {
  require(opt.scales_per_octave >= 1 && opt.translates_per_side >= 1, "cube family density must be positive");
  const double max_side = opt.max_side > 0 ? std::min(opt.max_side, domain.side) : domain.side;
  const double min_side = opt.min_side > 0 ? opt.min_side : domain.side / 64.0;
  require(min_side <= max_side, "cube family min_side exceeds max_side");
  CubeFamily fam{domain, {}};
  const int n = domain.dim;
  for (int k = 0;; ++k) {
    const double s = max_side * std::pow(2.0, -double(k) / opt.scales_per_octave);
    if (s < min_side * (1 - 1e-12)) break;
    const double step = s / opt.translates_per_side;
    const int count = int(std::floor((domain.side - s) / step + 1e-9)) + 1;
    for (int j = 0; j < (n == 2 ? count : 1); ++j) {
      for (int i = 0; i < count; ++i) {
        Point c{};
        c[0] = domain.lo(0) + 0.5 * s + i * step;
        if (n == 2) c[1] = domain.lo(1) + 0.5 * s + j * step;
        fam.cubes.emplace_back(c, s, n);
      }
    }
    // Anchor at relative offsets j/m along each axis; power-type weights peak on off-center cubes.
    const int m = 4 * opt.translates_per_side;
    for (const Point& a : opt.anchors) {
      for (int jy = 0; jy <= (n == 2 ? m : 0); ++jy) {
        for (int jx = 0; jx <= m; ++jx) {
          Point c{a[0] + (0.5 - double(jx) / m) * s, 0.0};
          if (n == 2) c[1] = a[1] + (0.5 - double(jy) / m) * s;
          Cube q(c, s, n);
          if (domain.contains(q)) fam.cubes.push_back(q);
        }
      }
    }
  }
  if (fam.cubes.empty()) throw InvalidArgument("cube family is empty");
  return fam;
}

/// Doubles the density of scales and translates.
inline CubeFamilyOptions refined(CubeFamilyOptions opt) {
  opt.scales_per_octave *= 2;
  opt.translates_per_side *= 2;
  return opt;
}

/// max over the family of (avg_Q w)(avg_Q w^{-1/(p-1)})^{p-1}.
inline double ap_constant(const Weight& w, double p, const CubeFamily& family) {
  if (!(p > 1.0)) throw InvalidArgument("ap_constant needs p > 1; use a1_constant for p = 1");
  const Weight dual = w.pow(-1.0 / (p - 1.0));
  double best = 0.0;
  for (const Cube& q : family.cubes) {
    const double vol = q.volume();
    const double avg = w.integral(q) / vol;
    const double avg_dual = dual.integral(q) / vol;
    if (!std::isfinite(avg_dual) || !std::isfinite(avg)) return kInf;
    best = std::max(best, avg * std::pow(avg_dual, p - 1.0));
  }
  return best;
}

/// max over the family of avg_Q w / min_grid(Q) w.
inline double a1_constant(const Weight& w, const CubeFamily& family, int points_per_axis = 256) {
  double best = 0.0;
  for (const Cube& q : family.cubes) {
    const double mn = w.grid_min(q, points_per_axis);
    if (!(mn > 0.0)) throw InvalidArgument("weight vanishes at a grid point; ess-inf surrogate degenerates");
    best = std::max(best, w.integral(q) / q.volume() / mn);
  }
  return best;
}

/// Estimate of q_w = inf{q > 1 : w in A_q}, with A_q membership read as ap_constant <= threshold.
inline double critical_index(const Weight& w, const CubeFamily& family, double threshold, int points_per_axis = 256) {
  require(threshold > 1.0, "A_p threshold must exceed 1");
  try {
    if (a1_constant(w, family, points_per_axis) <= threshold) return 1.0;
  } catch (const InvalidArgument&) {
    // Zero grid values: not A_1, continue with A_q.
  }
  const auto in_aq = [&](double q) { return ap_constant(w, q, family) <= threshold; };
  double hi = 2.0;
  while (!in_aq(hi)) {
    hi *= 2.0;
    if (hi > 4096.0) return kInf;
  }
  double lo = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    (in_aq(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// w(lambda Q) / w(Q).
inline double doubling_ratio(const Weight& w, const Cube& q, double lambda) {
  require(lambda > 1.0, "doubling factor must exceed 1");
  const double base = w.integral(q);
  if (!(base > 0.0)) throw InvalidArgument("w(Q) vanishes; doubling ratio undefined");
  return w.integral(q.dilate(lambda)) / base;
}

inline std::string to_string(Weight::Kind k) {
  switch (k) {
    case Weight::Kind::constant:
      return "constant";
    case Weight::Kind::power:
      return "power";
    case Weight::Kind::tabulated:
      return "tabulated";
  }
  return "?";
}

}  // namespace wisq
