#pragma once

// Scaled convolution f * phi_t(y) = t^{-n} \int f(z) phi((y - z)/t) dz.
//
// f is read as piecewise constant on its grid cells and phi as the (bi)linear
// interpolant through its cell-center samples, vanishing outside the hull of
// those samples. Each cell of f is integrated exactly against the interpolant
// through the cumulative integral Phi of phi, so constants are annihilated up
// to the kernel's own discrete mean and disjoint supports give exact zeros.

#include <cmath>
#include <cstddef>
#include <vector>

#include "wisq/error.hpp"
#include "wisq/grid.hpp"

namespace wisq {

class Kernel {
 public:
  Kernel() = default;

  /// phi must be sampled on a grid over [-1, 1]^n.
  explicit Kernel(const SampledFunction& phi) : phi_(phi.values), dim_(phi.dim()), m_(phi.grid.points_per_axis()) {
    const Cube& d = phi.grid.domain();
    for (int k = 0; k < dim_; ++k) {
      require(std::abs(d.center[k]) < 1e-12, "kernel grid must be centered at the origin");
    }
    require(std::abs(d.side - 2.0) < 1e-12, "kernel grid must cover [-1, 1]^n");
    h_ = phi.grid.spacing();
    first_ = phi.grid.coordinate(0, 0);
    last_ = phi.grid.coordinate(0, m_ - 1);
    if (dim_ == 1) {
      cum_.assign(std::size_t(m_), 0.0);
      for (int k = 1; k < m_; ++k) cum_[k] = cum_[k - 1] + 0.5 * h_ * (phi_[k - 1] + phi_[k]);
      total_ = cum_[m_ - 1];
    } else {
      build_2d();
    }
  }

  int dim() const { return dim_; }
  double node_spacing() const { return h_; }

  /// Integral of the interpolated kernel; zero for members of the test class.
  double total() const { return total_; }

  /// Cumulative integral over (-inf, u] in 1D.
  double cumulative(double u) const {
    if (u <= first_) return 0.0;
    if (u >= last_) return total_;
    int k = int((u - first_) / h_);
    if (k > m_ - 2) k = m_ - 2;
    const double s = u - (first_ + k * h_);
    return cum_[k] + phi_[k] * s + (phi_[k + 1] - phi_[k]) * s * s / (2.0 * h_);
  }

  /// Cumulative integral over (-inf, u] x (-inf, v] in 2D.
  double cumulative(double u, double v) const {
    if (u <= first_ || v <= first_) return 0.0;
    int ku = 0, kv = 0;
    double au = 0, bu = 0, av = 0, bv = 0;
    locate(u, ku, au, bu);
    locate(v, kv, av, bv);
    const auto at = [this](const std::vector<double>& t, int i, int j) { return t[std::size_t(i) + std::size_t(m_) * j]; };
    double r = at(tt_, ku, kv);
    if (au != 0.0 || bu != 0.0) r += au * at(col_, ku, kv) + (bu != 0.0 ? bu * at(col_, ku + 1, kv) : 0.0);
    if (av != 0.0 || bv != 0.0) r += av * at(row_, ku, kv) + (bv != 0.0 ? bv * at(row_, ku, kv + 1) : 0.0);
    if ((au != 0.0 || bu != 0.0) && (av != 0.0 || bv != 0.0)) {
      r += au * av * at(phi_, ku, kv);
      if (bv != 0.0) r += au * bv * at(phi_, ku, kv + 1);
      if (bu != 0.0) r += bu * av * at(phi_, ku + 1, kv);
      if (bu != 0.0 && bv != 0.0) r += bu * bv * at(phi_, ku + 1, kv + 1);
    }
    return r;
  }

 private:
  // Splits u into a trapezoid prefix up to node ku and partial weights on nodes ku, ku+1.
  void locate(double u, int& ku, double& a, double& b) const {
    if (u >= last_) {
      ku = m_ - 1;
      a = b = 0.0;
      return;
    }
    ku = int((u - first_) / h_);
    if (ku > m_ - 2) ku = m_ - 2;
    const double s = u - (first_ + ku * h_);
    b = s * s / (2.0 * h_);
    a = s - b;
  }

  void build_2d() {
    const std::size_t n = std::size_t(m_) * m_;
    row_.assign(n, 0.0);
    col_.assign(n, 0.0);
    tt_.assign(n, 0.0);
    const auto idx = [this](int i, int j) { return std::size_t(i) + std::size_t(m_) * j; };
    for (int j = 0; j < m_; ++j) {
      for (int i = 1; i < m_; ++i) row_[idx(i, j)] = row_[idx(i - 1, j)] + 0.5 * h_ * (phi_[idx(i - 1, j)] + phi_[idx(i, j)]);
    }
    for (int i = 0; i < m_; ++i) {
      for (int j = 1; j < m_; ++j) col_[idx(i, j)] = col_[idx(i, j - 1)] + 0.5 * h_ * (phi_[idx(i, j - 1)] + phi_[idx(i, j)]);
    }
    for (int i = 0; i < m_; ++i) {
      for (int j = 1; j < m_; ++j) tt_[idx(i, j)] = tt_[idx(i, j - 1)] + 0.5 * h_ * (row_[idx(i, j - 1)] + row_[idx(i, j)]);
    }
    total_ = tt_[idx(m_ - 1, m_ - 1)];
  }

  std::vector<double> phi_;
  std::vector<double> cum_;
  std::vector<double> row_, col_, tt_;  // 2D prefix integrals along u, along v, and both
  int dim_ = 1;
  int m_ = 0;
  double h_ = 0.0;
  double first_ = 0.0, last_ = 0.0;
  double total_ = 0.0;
};

/// f * phi_t(y). Exactly zero when every cell of f carrying a nonzero value lies farther than t from y.
inline double convolve_scaled(const SampledFunction& f, const Kernel& phi, double t, const Point& y) {
  if (!(t > 0.0)) throw InvalidArgument("convolution scale t must be positive");
  if (phi.dim() != f.dim()) throw InvalidArgument("kernel and function dimensions differ");
  const Grid& g = f.grid;
  const int m = g.points_per_axis();
  const double h = g.spacing();

  int lo[kMaxDim] = {0, 0}, hi[kMaxDim] = {0, 0};
  for (int k = 0; k < g.dim(); ++k) {
    const double base = g.edge(k, 0);
    lo[k] = std::max(0, int(std::floor((y[k] - t - base) / h)));
    hi[k] = std::min(m - 1, int(std::floor((y[k] + t - base) / h)));
    if (lo[k] > hi[k]) return 0.0;
  }

  if (g.dim() == 1) {
    // Cell i spans [e_i, e_{i+1}], i.e. u in [(y - e_{i+1})/t, (y - e_i)/t].
    double prev = phi.cumulative((y[0] - g.edge(0, lo[0])) / t);
    double sum = 0.0;
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const double next = phi.cumulative((y[0] - g.edge(0, i + 1)) / t);
      const double v = f.values[std::size_t(i)];
      if (v != 0.0) sum += v * (prev - next);
      prev = next;
    }
    return sum;
  }

  const int nu = hi[0] - lo[0] + 2;
  const int nv = hi[1] - lo[1] + 2;
  thread_local std::vector<double> corner;
  corner.resize(std::size_t(nu) * nv);
  for (int b = 0; b < nv; ++b) {
    const double v = (y[1] - g.edge(1, lo[1] + b)) / t;
    for (int a = 0; a < nu; ++a) {
      corner[std::size_t(a) + std::size_t(nu) * b] = phi.cumulative((y[0] - g.edge(0, lo[0] + a)) / t, v);
    }
  }
  double sum = 0.0;
  for (int j = lo[1]; j <= hi[1]; ++j) {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const double val = f.values[g.index(i, j)];
      if (val == 0.0) continue;
      const std::size_t a = std::size_t(i - lo[0]), b = std::size_t(j - lo[1]);
      const double c00 = corner[a + nu * b], c10 = corner[a + 1 + nu * b];
      const double c01 = corner[a + nu * (b + 1)], c11 = corner[a + 1 + nu * (b + 1)];
      sum += val * ((c00 - c01) - (c10 - c11));
    }
  }
  return sum;
}

/// Convenience overload resampling a raw kernel; prefer a prepared Kernel in loops.
inline double convolve_scaled(const SampledFunction& f, const SampledFunction& phi, double t, const Point& y) {
  return convolve_scaled(f, Kernel(phi), t, y);
}

}  // namespace wisq
