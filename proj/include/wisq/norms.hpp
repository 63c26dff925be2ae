#pragma once

// Weighted Lebesgue and weak Lebesgue quasi-norms, the Lip(alpha,1,0) norm and
// the superposition bound for weak-L^p sums.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "wisq/error.hpp"
#include "wisq/grid.hpp"
#include "wisq/weights.hpp"

namespace wisq {

/// Level sets of |f|: strictly decreasing values lambda_i with measure w{|f| >= lambda_i}.
/// The sup in the weak norm is attained just below one of these values.
struct LevelSetProfile {
  std::vector<double> levels;
  std::vector<double> measures;  // nondecreasing as levels decrease
  std::vector<double> masses;    // mass of the set {|f| = lambda_i}
};

inline LevelSetProfile level_set_profile(std::span<const double> values, std::span<const double> masses) {
  require(values.size() == masses.size(), "values and masses differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
  LevelSetProfile prof;
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = std::abs(values[order[k]]);
    if (v == 0.0) break;
    double mass = 0.0;
    while (k < order.size() && std::abs(values[order[k]]) == v) mass += masses[order[k++]];
    cum += mass;
    prof.levels.push_back(v);
    prof.masses.push_back(mass);
    prof.measures.push_back(cum);
  }
  return prof;
}

/// (sum |f_i|^p m_i)^{1/p}, summed over distinct levels in decreasing order.
inline double lp_norm(std::span<const double> values, std::span<const double> masses, double p) {
  require(p > 0.0, "L^p exponent must be positive");
  const LevelSetProfile prof = level_set_profile(values, masses);
  double s = 0.0;
  for (std::size_t k = 0; k < prof.levels.size(); ++k) s += std::pow(prof.levels[k], p) * prof.masses[k];
  return std::pow(s, 1.0 / p);
}

/// sup_lambda lambda * w{|f| > lambda}^{1/p}; exact for cell-wise constant f.
inline double weak_lp_norm(std::span<const double> values, std::span<const double> masses, double p) {
  require(p > 0.0, "weak L^p exponent must be positive");
  const LevelSetProfile prof = level_set_profile(values, masses);
  double best = 0.0;
  for (std::size_t k = 0; k < prof.levels.size(); ++k) {
    best = std::max(best, prof.levels[k] * std::pow(prof.measures[k], 1.0 / p));
  }
  return best;
}

inline double lp_norm(const SampledFunction& f, const Weight& w, double p) {
  const auto m = w.cell_masses(f.grid);
  return lp_norm(f.values, m, p);
}

inline double weak_lp_norm(const SampledFunction& f, const Weight& w, double p) {
  const auto m = w.cell_masses(f.grid);
  return weak_lp_norm(f.values, m, p);
}

inline LevelSetProfile level_set_profile(const SampledFunction& f, const Weight& w) {
  const auto m = w.cell_masses(f.grid);
  return level_set_profile(f.values, m);
}

/// Mean oscillation |Q|^{-1-alpha/n} \int_Q |b - b_Q| of b over one cube (discrete measure of Q).
inline double mean_oscillation(const SampledFunction& b, const Cube& q, double alpha) {
  const Grid& g = b.grid;
  const double slack = 1e-9 * g.spacing();
  std::vector<double> inside;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (q.contains(g.point(i), slack)) inside.push_back(b.values[i]);
  }
  if (inside.empty()) return 0.0;
  double mean = 0.0;
  for (double v : inside) mean += v;
  mean /= double(inside.size());
  double osc = 0.0;
  for (double v : inside) osc += std::abs(v - mean);
  const double vol = double(inside.size()) * g.cell_volume();
  osc *= g.cell_volume();
  return osc / std::pow(vol, 1.0 + alpha / g.dim());
}

/// sup over the family of the mean oscillation; the family's max side bounds what this can see.
inline double lip_norm(const SampledFunction& b, double alpha, const CubeFamily& family) {
  require(alpha > 0.0 && alpha <= 1.0, "Lipschitz order must lie in (0, 1]");
  double best = 0.0;
  for (const Cube& q : family.cubes) best = std::max(best, mean_oscillation(b, q, alpha));
  return best;
}

struct SuperpositionResult {
  SampledFunction combined;
  double lhs = 0.0;                // ||sum lambda_j f_j||^p in WL^p_w
  double sum_coeff = 0.0;          // sum |lambda_j|^p
  double bound = 0.0;              // (2 - p)/(1 - p)
  double max_component_norm = 0.0;
  bool preconditions_hold = false; // unit weak norms and sum_coeff <= 1
  bool holds = false;              // lhs <= bound
};

inline double superposition_bound(double p) {
  require(p > 0.0 && p < 1.0, "superposition needs 0 < p < 1");
  return (2.0 - p) / (1.0 - p);
}

inline SuperpositionResult superpose(std::span<const SampledFunction> fs, std::span<const double> lambdas, double p,
                                     const Weight& w) {
  require(fs.size() == lambdas.size(), "one coefficient per function is required");
  require(!fs.empty(), "superposition of an empty family");
  SuperpositionResult r;
  r.bound = superposition_bound(p);
  const Grid& g = fs.front().grid;
  const auto masses = w.cell_masses(g);
  std::vector<double> acc(g.size(), 0.0);
  for (std::size_t j = 0; j < fs.size(); ++j) {
    if (!(fs[j].grid == g)) throw InvalidArgument("superposed functions must share one grid");
    r.max_component_norm = std::max(r.max_component_norm, weak_lp_norm(fs[j].values, masses, p));
    r.sum_coeff += std::pow(std::abs(lambdas[j]), p);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += lambdas[j] * fs[j].values[i];
  }
  r.combined = SampledFunction(g, std::move(acc));
  r.lhs = std::pow(weak_lp_norm(r.combined.values, masses, p), p);
  r.preconditions_hold = r.max_component_norm <= 1.0 + 1e-12 && r.sum_coeff <= 1.0 + 1e-12;
  r.holds = r.lhs <= r.bound;
  return r;
}

}  // namespace wisq
