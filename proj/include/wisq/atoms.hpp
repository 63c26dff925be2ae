#pragma once

// w-(p,q,s)-atoms: construction by moment projection and norm saturation,
// validation of the support / norm / moment conditions, and finite atomic sums.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "wisq/error.hpp"
#include "wisq/grid.hpp"
#include "wisq/norms.hpp"
#include "wisq/weights.hpp"

namespace wisq {

using MultiIndex = std::array<int, kMaxDim>;

/// All multi-indices with |beta| <= s, ordered by degree.
inline std::vector<MultiIndex> multi_indices(int dim, int s) {
  std::vector<MultiIndex> out;
  for (int deg = 0; deg <= s; ++deg) {
    if (dim == 1) {
      out.push_back({deg, 0});
    } else {
      for (int a = deg; a >= 0; --a) out.push_back({a, deg - a});
    }
  }
  return out;
}

/// floor(n (q_w/p - 1)), floored at 0.
inline int required_moment_order(double p, double critical_index, int n) {
  require(p > 0.0 && p <= 1.0, "atoms need 0 < p <= 1");
  const double x = n * (critical_index / p - 1.0);
  return std::max(0, int(std::floor(x + 1e-12)));
}

struct Atom {
  SampledFunction f;
  Cube cube;
  double p = 1.0;
  double q = 2.0;
  int s = 0;
  Weight weight;
};

enum class ProfileKind { smooth_random, antisymmetric_sign, zero };

struct AtomOptions {
  int points_per_axis = 128;  // grid resolution over Q
  ProfileKind profile = ProfileKind::smooth_random;
};

namespace detail {

inline double monomial(const Point& x, const Point& x0, double scale, const MultiIndex& b, int dim) {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= std::pow((x[k] - x0[k]) / scale, b[k]);
  return v;
}

// Bump on the inscribed ball of Q, times a random polynomial of degree <= 3.
inline std::vector<double> random_profile(const Grid& g, const Cube& q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto betas = multi_indices(g.dim(), 3);
  std::vector<double> coeff(betas.size());
  for (double& c : coeff) c = normal(rng);
  std::uniform_real_distribution<double> width(0.55, 1.0);
  const double radius = width(rng);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.point(i);
    const double r = distance(x, q.center, g.dim()) / (0.5 * q.side * radius);
    if (r >= 1.0) continue;
    double poly = 0.0;
    for (std::size_t b = 0; b < betas.size(); ++b) poly += coeff[b] * monomial(x, q.center, 0.5 * q.side, betas[b], g.dim());
    v[i] = std::exp(1.0 - 1.0 / (1.0 - r * r)) * poly;
  }
  return v;
}

}  // namespace detail

/// Removes from v (values on grid points inside Q) its L^2(Q) projection onto polynomials of degree <= s.
inline void project_out_moments(std::vector<double>& v, const Grid& g, const Cube& q, int s) {
  const auto betas = multi_indices(g.dim(), s);
  const double h = g.cell_volume();
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (q.contains(g.point(i), 1e-12 * g.spacing())) inside.push_back(i);
  }
  // Modified Gram-Schmidt on the monomials restricted to Q.
  std::vector<std::vector<double>> basis;
  for (const MultiIndex& b : betas) {
    std::vector<double> e(inside.size());
    for (std::size_t k = 0; k < inside.size(); ++k) e[k] = detail::monomial(g.point(inside[k]), q.center, 0.5 * q.side, b, g.dim());
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : basis) {
        double dot = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) dot += e[k] * u[k] * h;
        for (std::size_t k = 0; k < e.size(); ++k) e[k] -= dot * u[k];
      }
    }
    double nrm = 0.0;
    for (double x : e) nrm += x * x * h;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) continue;
    for (double& x : e) x /= nrm;
    basis.push_back(std::move(e));
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& u : basis) {
      double dot = 0.0;
      for (std::size_t k = 0; k < inside.size(); ++k) dot += v[inside[k]] * u[k] * h;
      for (std::size_t k = 0; k < inside.size(); ++k) v[inside[k]] -= dot * u[k];
    }
  }
}

/// Builds a w-(p,q,s)-atom on Q whose L^q_w norm equals w(Q)^{1/q - 1/p}.
/// Throws DegenerateProfile when the profile vanishes after projection.
inline Atom build_atom(const Cube& q_cube, double p, double q, int s, const Weight& w, std::uint64_t shape_seed,
                       const AtomOptions& opt = {}) {
  require(p > 0.0 && p <= 1.0, "atoms need 0 < p <= 1");
  require(q >= 1.0 && std::isfinite(q), "atoms need 1 <= q < infinity");
  require(q != p, "atoms need p != q");
  require(s >= 0, "moment order must be nonnegative");
  require(w.dim() == q_cube.dim, "weight and cube dimensions differ");
  const Grid g = make_grid(q_cube, opt.points_per_axis);

  std::vector<double> v;
  switch (opt.profile) {
    case ProfileKind::smooth_random:
      v = detail::random_profile(g, q_cube, shape_seed);
      break;
    case ProfileKind::antisymmetric_sign:
      v.resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = g.point(i)[0] - q_cube.center[0];
        v[i] = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
      }
      break;
    case ProfileKind::zero:
      v.assign(g.size(), 0.0);
      break;
  }
  double before = 0.0;
  for (double x : v) before = std::max(before, std::abs(x));
  if (before == 0.0) throw DegenerateProfile("atom profile is identically zero");
  project_out_moments(v, g, q_cube, s);
  double after = 0.0;
  for (double x : v) after = std::max(after, std::abs(x));
  if (after <= 1e-10 * before) throw DegenerateProfile("moment projection annihilated the atom profile");

  const auto masses = w.cell_masses(g);
  const double norm = lp_norm(v, masses, q);
  const double target = std::pow(w.integral(q_cube), 1.0 / q - 1.0 / p);
  for (double& x : v) x *= target / norm;
  return Atom{SampledFunction(g, std::move(v)), q_cube, p, q, s, w};
}

struct AtomTolerances {
  double moment_rel = 1e-8;  // times ||a||_1 * side^|beta|
  double norm_rel = 1e-9;
};

struct AtomCertificate {
  bool support_ok = false;
  bool moments_ok = false;
  bool norm_ok = false;
  std::vector<MultiIndex> moment_indices;
  std::vector<double> moments;
  std::vector<bool> moment_ok;
  double norm = 0.0;        // ||a||_{L^q_w}
  double norm_bound = 0.0;  // w(Q)^{1/q - 1/p}
  double norm_ratio = 0.0;  // norm / bound; 1 for a saturated atom
  double norm_margin = 0.0; // 1 - norm_ratio
  double support_leak = 0.0;
  bool accepted() const { return support_ok && moments_ok && norm_ok; }
};

inline AtomCertificate validate_atom(const Atom& a, const AtomTolerances& tol = {}) {
  AtomCertificate c;
  const Grid& g = a.f.grid;
  const double h = g.cell_volume();
  const double slack = 1e-12 * g.spacing();
  double l1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!a.cube.contains(g.point(i), slack)) c.support_leak = std::max(c.support_leak, std::abs(a.f.values[i]));
    l1 += std::abs(a.f.values[i]) * h;
  }
  c.support_ok = c.support_leak == 0.0;

  c.moment_indices = multi_indices(g.dim(), a.s);
  c.moments_ok = true;
  for (const MultiIndex& b : c.moment_indices) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (a.f.values[i] != 0.0) m += a.f.values[i] * detail::monomial(g.point(i), a.cube.center, 1.0, b, g.dim()) * h;
    }
    const double allowed = tol.moment_rel * l1 * std::pow(a.cube.side, b[0] + b[1]);
    const bool ok = std::abs(m) <= allowed;
    c.moments.push_back(m);
    c.moment_ok.push_back(ok);
    c.moments_ok = c.moments_ok && ok;
  }

  const auto masses = a.weight.cell_masses(g);
  c.norm = lp_norm(a.f.values, masses, a.q);
  c.norm_bound = std::pow(a.weight.integral(a.cube), 1.0 / a.q - 1.0 / a.p);
  c.norm_ratio = c.norm / c.norm_bound;
  c.norm_margin = 1.0 - c.norm_ratio;
  c.norm_ok = c.norm_ratio <= 1.0 + tol.norm_rel;
  return c;
}

/// Both sides of the L^1 estimate of an atom through Hoelder and the A_q condition.
struct L1BoundCheck {
  double lhs = 0.0;          // \int_Q |a|
  double holder_rhs = 0.0;   // ||a||_{L^q_w} (\int_Q w^{-1/(q-1)})^{1/q'}
  double ratio = 0.0;        // lhs * w(Q)^{1/p} / |Q|
};

inline L1BoundCheck atom_l1_bound_check(const Atom& a, const Weight& w, double q) {
  require(q > 1.0, "Hoelder step needs q > 1");
  const Grid& g = a.f.grid;
  L1BoundCheck r;
  for (double v : a.f.values) r.lhs += std::abs(v);
  r.lhs *= g.cell_volume();
  const auto masses = w.cell_masses(g);
  const auto dual = w.pow(-1.0 / (q - 1.0)).cell_masses(g);
  double dual_sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a.cube.contains(g.point(i), 1e-12 * g.spacing())) dual_sum += dual[i];
  }
  r.holder_rhs = lp_norm(a.f.values, masses, q) * std::pow(dual_sum, (q - 1.0) / q);
  r.ratio = r.lhs * std::pow(w.integral(a.cube), 1.0 / a.p) / a.cube.volume();
  return r;
}

/// Finite sum sum_j lambda_j a_j over atoms sharing one grid.
struct AtomicSum {
  std::vector<Atom> atoms;
  std::vector<double> coefficients;

  double coefficient_sum(double p) const {
    double s = 0.0;
    for (double c : coefficients) s += std::pow(std::abs(c), p);
    return s;
  }

  /// Pointwise sum resampled onto g (atoms are read as piecewise constant on their cells).
  SampledFunction evaluate(const Grid& g) const {
    require(atoms.size() == coefficients.size(), "one coefficient per atom is required");
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      const Grid& ag = atoms[j].f.grid;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.point(i);
        if (!ag.domain().contains(x)) continue;
        int idx[kMaxDim] = {0, 0};
        bool ok = true;
        for (int k = 0; k < g.dim(); ++k) {
          idx[k] = int(std::floor((x[k] - ag.edge(k, 0)) / ag.spacing()));
          ok = ok && idx[k] >= 0 && idx[k] < ag.points_per_axis();
        }
        if (ok) v[i] += coefficients[j] * atoms[j].f.values[ag.index(idx[0], idx[1])];
      }
    }
    return SampledFunction(g, std::move(v));
  }
};

}  // namespace wisq
