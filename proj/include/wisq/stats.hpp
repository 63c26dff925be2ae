#pragma once

// Small summary statistics used by the verification suites.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "wisq/error.hpp"

namespace wisq {

/// Least-squares slope of y against x.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "regression needs at least two paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(x.size());
  my /= double(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  require(sxx > 0.0, "regression abscissae are all equal");
  return sxy / sxx;
}

/// Slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive samples");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return regression_slope(lx, ly);
}

/// max / min of positive samples; 1 for a single sample.
inline double spread_ratio(std::span<const double> v) {
  require(!v.empty(), "spread of an empty sample");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo <= 0.0) return *hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  return *hi / *lo;
}

inline double max_of(std::span<const double> v) {
  require(!v.empty(), "max of an empty sample");
  return *std::max_element(v.begin(), v.end());
}

/// Per-group geometric means of v, grouped by equal keys in ascending key order.
inline std::vector<std::pair<double, double>> grouped_geomean(std::span<const double> keys, std::span<const double> v) {
  std::vector<double> uniq(keys.begin(), keys.end());
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  std::vector<std::pair<double, double>> out;
  for (double k : uniq) {
    double s = 0.0;
    int c = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == k) {
        s += std::log(v[i]);
        ++c;
      }
    }
    out.emplace_back(k, std::exp(s / c));
  }
  return out;
}

/// A scale trend: group means strictly monotone across all groups and changing by more than `factor` end to end.
inline bool monotone_trend(const std::vector<std::pair<double, double>>& groups, double factor) {
  if (groups.size() < 3) return false;
  bool up = true, down = true;
  for (std::size_t i = 1; i < groups.size(); ++i) {
    up = up && groups[i].second > groups[i - 1].second;
    down = down && groups[i].second < groups[i - 1].second;
  }
  const double change = groups.back().second / groups.front().second;
  return (up && change > factor) || (down && change < 1.0 / factor);
}

inline double relative_change(double base, double other) {
  if (base == 0.0) return other == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(other - base) / std::abs(base);
}

}  // namespace wisq
