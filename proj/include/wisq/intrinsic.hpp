#pragma once

// Intrinsic square functions of order alpha.
//
// The supremum over the test class C_alpha is taken over a finite certified
// dictionary, so every value computed here is a lower bound for the true
// operator. All operators share one discretised upper half-space: geometric
// t-levels with a log-midpoint weight, and at each level a lattice of y-cells
// of width t / y_cells_per_t anchored at the origin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wisq/error.hpp"
#include "wisq/grid.hpp"
#include "wisq/kernel.hpp"
#include "wisq/parallel.hpp"

namespace wisq {

// ---------------------------------------------------------------------------
// Test-function dictionary

struct MemberCertificate {
  double seminorm = 0.0;        // max |phi(x) - phi(x')| / |x - x'|^alpha over node pairs
  double mean = 0.0;            // integral of the interpolated member
  double support_radius = 0.0;  // max |x| over nonzero nodes
  bool pass = false;
};

namespace detail {

inline double holder_seminorm(const SampledFunction& phi, double alpha) {
  const Grid& g = phi.grid;
  const int m = g.points_per_axis();
  const double h = g.spacing();
  const auto& v = phi.values;
  double best = 0.0;
  if (g.dim() == 1) {
    for (int d = 1; d < m; ++d) {
      const double inv = 1.0 / std::pow(d * h, alpha);
      for (int i = 0; i + d < m; ++i) best = std::max(best, std::abs(v[i + d] - v[i]) * inv);
    }
    return best;
  }
  // Offsets (dx, dy) with dx > 0, or dx == 0 and dy > 0, cover every unordered pair once.
  // Beyond 4096 nodes the first point of each pair is strided.
  const std::size_t nodes = g.size();
  const int stride = nodes > 4096 ? int(std::ceil(double(nodes) / 4096.0)) : 1;
  for (int dx = 0; dx < m; ++dx) {
    for (int dy = (dx == 0 ? 1 : -(m - 1)); dy < m; ++dy) {
      const double inv = 1.0 / std::pow(h * std::sqrt(double(dx * dx + dy * dy)), alpha);
      const int j0 = std::max(0, -dy), j1 = std::min(m, m - dy);
      for (int j = j0; j < j1; ++j) {
        for (int i = 0; i + dx < m; i += stride) {
          const double a = v[g.index(i, j)], b = v[g.index(i + dx, j + dy)];
          best = std::max(best, std::abs(a - b) * inv);
        }
      }
    }
  }
  return best;
}

inline double norm_of(const Point& u, int dim) { return std::sqrt(u[0] * u[0] + (dim == 2 ? u[1] * u[1] : 0.0)); }

/// Smooth bump exp(1 - 1/(1 - |u|^2)) on the unit ball, 0 outside.
inline double bump(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

}  // namespace detail

inline MemberCertificate certify_member(const SampledFunction& phi, double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, "Hoelder order must lie in (0, 1]");
  MemberCertificate c;
  c.seminorm = detail::holder_seminorm(phi, alpha);
  c.mean = Kernel(phi).total();
  for (std::size_t i = 0; i < phi.values.size(); ++i) {
    if (phi.values[i] != 0.0) c.support_radius = std::max(c.support_radius, detail::norm_of(phi.grid.point(i), phi.dim()));
  }
  c.pass = c.seminorm <= 1.0 + 1e-6 && std::abs(c.mean) <= 1e-10 && c.support_radius <= 1.0 + phi.grid.spacing();
  return c;
}

/// Grid over [-1, 1]^n on which dictionary members are sampled.
inline Grid unit_kernel_grid(int dim, int resolution) { return make_grid(Cube({0.0, 0.0}, 2.0, dim), resolution); }

enum class Generator { antisymmetric_bump, bump_difference, modulated_bump, lacunary, cusp, multiscale };

inline std::string to_string(Generator g) {
  switch (g) {
    case Generator::antisymmetric_bump:
      return "antisymmetric_bump";
    case Generator::bump_difference:
      return "bump_difference";
    case Generator::modulated_bump:
      return "modulated_bump";
    case Generator::lacunary:
      return "lacunary";
    case Generator::cusp:
      return "cusp";
    case Generator::multiscale:
      return "multiscale";
  }
  return "?";
}

inline Generator generator_from_string(const std::string& s) {
  for (Generator g : {Generator::antisymmetric_bump, Generator::bump_difference, Generator::modulated_bump,
                      Generator::lacunary, Generator::cusp, Generator::multiscale}) {
    if (to_string(g) == s) return g;
  }
  throw InvalidArgument("unknown dictionary generator: " + s);
}

namespace generators {

/// Subtracts c * envelope so the interpolated integral vanishes.
inline void remove_mean(SampledFunction& phi, const std::vector<double>& envelope) {
  const Kernel k(phi);
  const Kernel ke(SampledFunction(phi.grid, envelope));
  if (ke.total() == 0.0) return;
  const double c = k.total() / ke.total();
  for (std::size_t i = 0; i < phi.values.size(); ++i) phi.values[i] -= c * envelope[i];
}

/// b((u - c)/rho) - b((u + c)/rho); odd, hence mean zero on a symmetric grid.
inline SampledFunction antisymmetric_bump(const Grid& g, const Point& c, double rho) {
  return SampledFunction::sample(g, [&](const Point& u) {
    Point a{u[0] - c[0], u[1] - c[1]}, b{u[0] + c[0], u[1] + c[1]};
    return detail::bump(detail::norm_of(a, g.dim()) / rho) - detail::bump(detail::norm_of(b, g.dim()) / rho);
  });
}

/// b((u + delta e)/rho) - b((u - delta e)/rho), supported in |u| <= delta + rho.
inline SampledFunction bump_difference(const Grid& g, double delta, double rho, const Point& e) {
  return SampledFunction::sample(g, [&](const Point& u) {
    Point a{u[0] + delta * e[0], u[1] + delta * e[1]}, b{u[0] - delta * e[0], u[1] - delta * e[1]};
    return detail::bump(detail::norm_of(a, g.dim()) / rho) - detail::bump(detail::norm_of(b, g.dim()) / rho);
  });
}

/// b(u/rho) cos(omega . u + theta), with a multiple of b(u/rho) removed to kill the mean.
inline SampledFunction modulated_bump(const Grid& g, double rho, const Point& omega, double theta) {
  auto env = SampledFunction::sample(g, [&](const Point& u) { return detail::bump(detail::norm_of(u, g.dim()) / rho); });
  auto phi = SampledFunction::sample(g, [&](const Point& u) {
    return detail::bump(detail::norm_of(u, g.dim()) / rho) * std::cos(omega[0] * u[0] + omega[1] * u[1] + theta);
  });
  remove_mean(phi, env.values);
  return phi;
}

/// b(u/rho) sum_j 2^{-j alpha} cos(2^j omega0 e_j . u + theta_j): rough at every scale down to the grid.
inline SampledFunction lacunary(const Grid& g, double rho, double alpha, double omega0, int octaves,
                                const std::vector<Point>& directions, const std::vector<double>& phases) {
  auto env = SampledFunction::sample(g, [&](const Point& u) { return detail::bump(detail::norm_of(u, g.dim()) / rho); });
  auto phi = SampledFunction::sample(g, [&](const Point& u) {
    const double b = detail::bump(detail::norm_of(u, g.dim()) / rho);
    if (b == 0.0) return 0.0;
    double w = 0.0;
    for (int j = 0; j < octaves; ++j) {
      const Point& e = directions[std::size_t(j) % directions.size()];
      w += std::pow(2.0, -j * alpha) * std::cos(std::ldexp(omega0, j) * (e[0] * u[0] + e[1] * u[1]) + phases[j]);
    }
    return b * w;
  });
  remove_mean(phi, env.values);
  return phi;
}

/// b(u/rho) sign(s)|s|^alpha with s = e . u - c: a one-sided Hoelder cusp on a hyperplane.
inline SampledFunction cusp(const Grid& g, double rho, double alpha, double c, const Point& e) {
  auto env = SampledFunction::sample(g, [&](const Point& u) { return detail::bump(detail::norm_of(u, g.dim()) / rho); });
  auto phi = SampledFunction::sample(g, [&](const Point& u) {
    const double s = e[0] * u[0] + e[1] * u[1] - c;
    return detail::bump(detail::norm_of(u, g.dim()) / rho) * std::copysign(std::pow(std::abs(s), alpha), s);
  });
  remove_mean(phi, env.values);
  return phi;
}

/// Disjoint wavelets sigma^alpha psi((u - c_k)/sigma) on a lattice of spacing 2 sigma.
/// Each psi is an odd smooth bump or an odd Hoelder cusp with a random sign (and direction in 2D).
inline SampledFunction multiscale(const Grid& g, double alpha, double sigma, double offset, std::mt19937_64& rng) {
  const int dim = g.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> centers;
  for (double c = -1.0 + sigma + offset; c + sigma <= 1.0 + 1e-12; c += 2.0 * sigma) centers.push_back(c);
  struct Piece {
    Point c, e;
    double sign;
    bool rough;
  };
  std::vector<Piece> pieces;
  for (std::size_t j = 0; j < (dim == 2 ? centers.size() : 1); ++j) {
    for (double cx : centers) {
      Piece p;
      p.c = {cx, dim == 2 ? centers[j] : 0.0};
      if (dim == 2 && detail::norm_of(p.c, 2) + sigma > 1.0) continue;
      const double a = 2.0 * std::numbers::pi * unit(rng);
      p.e = dim == 2 ? Point{std::cos(a), std::sin(a)} : Point{1.0, 0.0};
      p.sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      p.rough = unit(rng) < 0.5;
      pieces.push_back(p);
    }
  }
  const double amp = std::pow(sigma, alpha);
  std::vector<double> env(g.size(), 0.0);
  std::vector<double> vals(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point u = g.point(i);
    for (const Piece& p : pieces) {
      const Point v{(u[0] - p.c[0]) / sigma, (u[1] - p.c[1]) / sigma};
      const double r = detail::norm_of(v, dim);
      if (r >= 1.0) continue;
      const double s = p.e[0] * v[0] + p.e[1] * v[1];
      const double shape = p.rough ? std::copysign(std::pow(std::abs(s), alpha), s) : std::sin(std::numbers::pi * s);
      env[i] = amp * detail::bump(r);
      vals[i] = p.sign * env[i] * shape;
      break;
    }
  }
  SampledFunction phi(g, std::move(vals));
  remove_mean(phi, env);
  return phi;
}

}  // namespace generators

struct DictionaryMember {
  SampledFunction phi;
  Kernel kernel;
  Generator generator = Generator::antisymmetric_bump;
  MemberCertificate certificate;
};

struct DictionaryOptions {
  int dim = 1;
  int resolution = 1024;  // nodes per axis over [-1, 1]^n
  // Mostly multiscale packings: smooth members alone decay one power of t too fast.
  std::vector<Generator> cycle = {
      Generator::multiscale,      Generator::multiscale, Generator::multiscale, Generator::multiscale,
      Generator::multiscale,      Generator::antisymmetric_bump, Generator::multiscale, Generator::multiscale,
      Generator::multiscale,      Generator::multiscale, Generator::multiscale, Generator::bump_difference,
      Generator::multiscale,      Generator::multiscale, Generator::multiscale, Generator::modulated_bump};
  int max_retries = 8;
};

struct TestFunctionDictionary {
  double alpha = 0.5;
  int dim = 1;
  std::uint64_t seed = 0;
  std::vector<DictionaryMember> members;

  std::size_t size() const { return members.size(); }

  void add(SampledFunction phi, Generator gen) {
    MemberCertificate cert = certify_member(phi, alpha);
    require(cert.pass, "dictionary member fails certification");
    Kernel k(phi);
    members.push_back(DictionaryMember{std::move(phi), std::move(k), gen, cert});
  }

  double max_seminorm() const {
    double s = 0.0;
    for (const auto& m : members) s = std::max(s, m.certificate.seminorm);
    return s;
  }
};

namespace detail {

inline Point random_direction(std::mt19937_64& rng, int dim) {
  if (dim == 1) return {1.0, 0.0};
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  const double a = ang(rng);
  return {std::cos(a), std::sin(a)};
}

/// Dyadic scales 1, 1/2, ... down to four node spacings.
inline std::vector<double> packing_scales(const Grid& g) {
  std::vector<double> s;
  for (double sigma = 1.0; sigma >= 4.0 * g.spacing() * (1 - 1e-12); sigma *= 0.5) s.push_back(sigma);
  return s;
}

inline SampledFunction generate_candidate(Generator gen, const Grid& g, double alpha, std::mt19937_64& rng,
                                          int ordinal = 0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = g.dim();
  switch (gen) {
    case Generator::antisymmetric_bump: {
      const double rho = 0.25 + 0.4 * unit(rng);
      const double off = (1.0 - rho) * (0.2 + 0.8 * unit(rng));
      const Point e = random_direction(rng, dim);
      return generators::antisymmetric_bump(g, {off * e[0], off * e[1]}, rho);
    }
    case Generator::bump_difference: {
      const double delta = 0.05 + 0.35 * unit(rng);
      const double rho = (1.0 - delta) * (0.6 + 0.4 * unit(rng));
      return generators::bump_difference(g, delta, rho, random_direction(rng, dim));
    }
    case Generator::modulated_bump: {
      const double rho = 0.6 + 0.4 * unit(rng);
      const double k = std::numbers::pi * (1.0 + 5.0 * unit(rng));
      const Point e = random_direction(rng, dim);
      return generators::modulated_bump(g, rho, {k * e[0], k * e[1]}, 2.0 * std::numbers::pi * unit(rng));
    }
    case Generator::lacunary: {
      const double rho = 0.85 + 0.15 * unit(rng);
      const double omega0 = std::numbers::pi * (0.75 + 0.5 * unit(rng));
      // Highest frequency keeps at least four nodes per period.
      const double nyquist = std::numbers::pi / (2.0 * g.spacing());
      const int octaves = std::max(1, int(std::floor(std::log2(nyquist / omega0))) + 1);
      std::vector<Point> dirs;
      std::vector<double> phases;
      for (int j = 0; j < octaves; ++j) {
        dirs.push_back(random_direction(rng, dim));
        phases.push_back(2.0 * std::numbers::pi * unit(rng));
      }
      return generators::lacunary(g, rho, alpha, omega0, octaves, dirs, phases);
    }
    case Generator::cusp: {
      const double rho = 0.8 + 0.2 * unit(rng);
      const double c = (2.0 * unit(rng) - 1.0) * 0.6 * rho;
      return generators::cusp(g, rho, alpha, c, random_direction(rng, dim));
    }
    case Generator::multiscale: {
      const auto scales = packing_scales(g);
      const double sigma = scales[std::size_t(ordinal) % scales.size()];
      // Offsets of successive members at one scale follow a golden-ratio sequence.
      const double round = double(std::size_t(ordinal) / scales.size());
      const double frac = std::fmod(0.5 + round * 0.6180339887498949, 1.0);
      const double offset = sigma == 1.0 ? 0.0 : 2.0 * sigma * frac * 0.999;
      return generators::multiscale(g, alpha, sigma, offset, rng);
    }
  }
  return SampledFunction::zeros(g);
}

}  // namespace detail

/// Certified dictionary: each member rescaled so its measured Hoelder-alpha seminorm is 1.
inline TestFunctionDictionary build_dictionary(double alpha, int size, std::uint64_t seed, const DictionaryOptions& opt = {}) {
  require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  require(size >= 1, "dictionary size must be at least 1");
  require(!opt.cycle.empty(), "dictionary needs at least one generator");
  const Grid g = unit_kernel_grid(opt.dim, opt.resolution);
  TestFunctionDictionary dict;
  dict.alpha = alpha;
  dict.dim = opt.dim;
  dict.seed = seed;
  int ordinal = 0;  // running count of multiscale members: selects their scale
  for (int j = 0; j < size; ++j) {
    const Generator gen = opt.cycle[std::size_t(j) % opt.cycle.size()];
    bool added = false;
    for (int attempt = 0; attempt < opt.max_retries && !added; ++attempt) {
      std::seed_seq sq{std::uint64_t(seed), std::uint64_t(j), std::uint64_t(attempt)};
      std::mt19937_64 rng(sq);
      SampledFunction phi = detail::generate_candidate(gen, g, alpha, rng, ordinal);
      const double sn = detail::holder_seminorm(phi, alpha);
      if (!(sn > 0.0) || !std::isfinite(sn)) continue;
      for (double& v : phi.values) v /= sn;
      if (!certify_member(phi, alpha).pass) continue;
      dict.add(std::move(phi), gen);
      added = true;
    }
    if (gen == Generator::multiscale) ++ordinal;
    if (!added) throw Error("dictionary generator failed certification after retries");
  }
  return dict;
}

/// sup over the dictionary of |f * phi_t(y)|: a lower bound of A_alpha(f)(y, t).
inline double intrinsic_A(const SampledFunction& f, const Point& y, double t, const TestFunctionDictionary& dict) {
  if (!(t > 0.0)) throw InvalidArgument("scale t must be positive");
  double best = 0.0;
  for (const auto& m : dict.members) best = std::max(best, std::abs(convolve_scaled(f, m.kernel, t, y)));
  return best;
}

// ---------------------------------------------------------------------------
// Discretised upper half-space

struct ConeGrid {
  std::vector<double> t_levels;  // t_j = t_min * ratio^j
  double log_step = 0.0;         // ln(ratio): weight of each level in dt/t
  double y_cells_per_t = 8.0;    // y-lattice spacing is t / y_cells_per_t
  int dim = 1;

  double spacing(std::size_t j) const { return t_levels[j] / y_cells_per_t; }
};

inline ConeGrid make_cone_grid(double t_min, double t_max, double ratio, int dim, double y_cells_per_t = 8.0) {
  require(t_min > 0.0, "t_min must be positive");
  require(ratio > 1.0, "t ratio must exceed 1");
  require(t_max >= t_min, "t_max must be at least t_min");
  require(y_cells_per_t >= 1.0, "cone cross-section needs at least one cell per t");
  ConeGrid c;
  c.dim = dim;
  c.log_step = std::log(ratio);
  c.y_cells_per_t = y_cells_per_t;
  for (int j = 0;; ++j) {
    const double t = t_min * std::pow(ratio, j);
    if (t > t_max * (1 + 1e-12)) break;
    c.t_levels.push_back(t);
  }
  return c;
}

/// A_alpha(f)^2 tabulated on the cone lattice. Cells outside the stored box have A = 0 exactly.
class ConeField {
 public:
  struct Level {
    double t = 0.0;
    double spacing = 0.0;
    int lo[kMaxDim] = {0, 0};
    int count[kMaxDim] = {1, 1};
    std::vector<double> a2;

    double coordinate(int k, int i) const { return (lo[k] + i) * spacing; }
  };

  ConeField(const SampledFunction& f, const ConeGrid& cone, const TestFunctionDictionary& dict, unsigned threads = 0)
      : cone_(cone), dim_(f.dim()) {
    require(cone.dim == f.dim() && dict.dim == f.dim(), "function, cone and dictionary dimensions differ");
    if (cone.t_levels.empty()) throw InvalidArgument("empty cone grid");
    const Cube& dom = f.grid.domain();
    struct Job {
      std::size_t level, cell;
    };
    std::vector<Job> jobs;
    levels_.resize(cone.t_levels.size());
    for (std::size_t j = 0; j < levels_.size(); ++j) {
      Level& L = levels_[j];
      L.t = cone.t_levels[j];
      L.spacing = cone.spacing(j);
      std::size_t cells = 1;
      for (int k = 0; k < dim_; ++k) {
        L.lo[k] = int(std::floor((dom.lo(k) - L.t) / L.spacing)) - 1;
        const int hi = int(std::ceil((dom.hi(k) + L.t) / L.spacing)) + 1;
        L.count[k] = hi - L.lo[k] + 1;
        cells *= std::size_t(L.count[k]);
      }
      L.a2.assign(cells, 0.0);
      for (std::size_t c = 0; c < cells; ++c) jobs.push_back({j, c});
    }
    parallel_for(
        jobs.size(),
        [&](std::size_t n) {
          Level& L = levels_[jobs[n].level];
          const std::size_t c = jobs[n].cell;
          Point y{};
          y[0] = L.coordinate(0, int(c % std::size_t(L.count[0])));
          if (dim_ == 2) y[1] = L.coordinate(1, int(c / std::size_t(L.count[0])));
          const double a = intrinsic_A(f, y, L.t, dict);
          L.a2[c] = a * a;
        },
        threads);
  }

  const ConeGrid& cone() const { return cone_; }
  const std::vector<Level>& levels() const { return levels_; }
  int dim() const { return dim_; }

  /// sum_j (ln rho / t_j^n) sum_cells A^2 * weight(level, cell center, cell spacing), in fixed order.
  /// `weight` receives (t, center y, spacing) and returns the integral of the y-kernel over the cell.
  template <class CellWeight>
  double integrate(const Point& x, double reach, CellWeight&& weight) const {
    double total = 0.0;
    for (const Level& L : levels_) {
      const double radius = reach * L.t + L.spacing;
      int lo[kMaxDim] = {0, 0}, hi[kMaxDim] = {0, 0};
      for (int k = 0; k < dim_; ++k) {
        lo[k] = std::max(0, int(std::floor((x[k] - radius) / L.spacing)) - L.lo[k]);
        hi[k] = std::min(L.count[k] - 1, int(std::ceil((x[k] + radius) / L.spacing)) - L.lo[k]);
      }
      double level_sum = 0.0;
      for (int j = lo[1]; j <= (dim_ == 2 ? hi[1] : 0); ++j) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const double a2 = L.a2[std::size_t(i) + std::size_t(L.count[0]) * std::size_t(j)];
          if (a2 == 0.0) continue;
          Point y{};
          y[0] = L.coordinate(0, i);
          if (dim_ == 2) y[1] = L.coordinate(1, j);
          const double w = weight(L.t, y, L.spacing);
          if (w != 0.0) level_sum += a2 * w;
        }
      }
      total += level_sum * cone_.log_step / std::pow(L.t, dim_);
    }
    return total;
  }

 private:
  ConeGrid cone_;
  int dim_ = 1;
  std::vector<Level> levels_;
};

namespace detail {

inline constexpr int kSubcells = 4;  // per axis, for 2D cell-ball overlaps

// |cell(y, s) \cap B(x, R)|.
inline double ball_overlap(const Point& x, double radius, const Point& y, double s, int dim) {
  if (dim == 1) {
    return std::max(0.0, std::min(y[0] + 0.5 * s, x[0] + radius) - std::max(y[0] - 0.5 * s, x[0] - radius));
  }
  const double sub = s / kSubcells;
  int inside = 0;
  for (int b = 0; b < kSubcells; ++b) {
    for (int a = 0; a < kSubcells; ++a) {
      const double dx = y[0] - 0.5 * s + (a + 0.5) * sub - x[0];
      const double dy = y[1] - 0.5 * s + (b + 0.5) * sub - x[1];
      if (dx * dx + dy * dy < radius * radius) ++inside;
    }
  }
  return inside * sub * sub;
}

// \int_{cell \cap B(x, R)} (t / (t + |x - y|))^mu dy.
inline double kernel_overlap(const Point& x, double radius, const Point& y, double s, double t, double mu, int dim) {
  if (dim == 1) {
    const double a = std::max(y[0] - 0.5 * s, x[0] - radius) - x[0];
    const double b = std::min(y[0] + 0.5 * s, x[0] + radius) - x[0];
    if (b <= a) return 0.0;
    // G(d) = \int_0^d (1 + u/t)^{-mu} du, extended oddly.
    const auto G = [t, mu](double d) {
      const double g = t / (mu - 1.0) * (1.0 - std::pow(1.0 + std::abs(d) / t, 1.0 - mu));
      return d < 0 ? -g : g;
    };
    return G(b) - G(a);
  }
  const double sub = s / kSubcells;
  double sum = 0.0;
  for (int b = 0; b < kSubcells; ++b) {
    for (int a = 0; a < kSubcells; ++a) {
      const double dx = y[0] - 0.5 * s + (a + 0.5) * sub - x[0];
      const double dy = y[1] - 0.5 * s + (b + 0.5) * sub - x[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < radius * radius) sum += std::pow(t / (t + std::sqrt(d2)), mu);
    }
  }
  return sum * sub * sub;
}

}  // namespace detail

/// S_{alpha,beta}(f)(x): aperture-beta cone integral of A^2 dy dt / t^{n+1}.
inline double area_function(const ConeField& field, const Point& x, double beta) {
  require(beta > 0.0, "aperture must be positive");
  const int n = field.dim();
  const double s2 = field.integrate(x, beta, [&](double t, const Point& y, double s) {
    return detail::ball_overlap(x, beta * t, y, s, n);
  });
  return std::sqrt(s2);
}

/// g*_{lambda,alpha}(f)(x), y-integration truncated to |x - y| < 2^{k_max} t.
inline double gstar_function(const ConeField& field, const Point& x, double lambda, int k_max = 6) {
  require(lambda > 1.0, "g* needs lambda > 1");
  const int n = field.dim();
  const double mu = lambda * n;
  const double reach = std::ldexp(1.0, k_max);
  const double s2 = field.integrate(x, reach, [&](double t, const Point& y, double s) {
    return detail::kernel_overlap(x, reach * t, y, s, t, mu, n);
  });
  return std::sqrt(s2);
}

/// Contributions of the annuli 2^{k-1} t <= |x - y| < 2^k t (k = 0 is the unit cone) to g*^2,
/// with the kernel frozen at each cell center and the annulus measured through aperture overlaps.
inline std::vector<double> gstar_annuli(const ConeField& field, const Point& x, double lambda, int K) {
  require(lambda > 1.0, "g* needs lambda > 1");
  require(K >= 1, "annular decomposition needs K >= 1");
  const int n = field.dim();
  const double mu = lambda * n;
  std::vector<double> parts;
  for (int k = 0; k <= K; ++k) {
    const double outer = std::ldexp(1.0, k);
    const double inner = k == 0 ? 0.0 : std::ldexp(1.0, k - 1);
    parts.push_back(field.integrate(x, outer, [&](double t, const Point& y, double s) {
      const double ring = detail::ball_overlap(x, outer * t, y, s, n) - (k == 0 ? 0.0 : detail::ball_overlap(x, inner * t, y, s, n));
      if (ring <= 0.0) return 0.0;
      return ring * std::pow(t / (t + distance(x, y, n)), mu);
    }));
  }
  return parts;
}

/// (sum_{k<=K} annulus_k)^{1/2}; nondecreasing in K.
inline double gstar_via_apertures(const ConeField& field, const Point& x, double lambda, int K) {
  double s = 0.0;
  for (double part : gstar_annuli(field, x, lambda, K)) s += part;
  return std::sqrt(s);
}

/// g_alpha(f)(x) = (sum_j A(x, t_j)^2 ln rho)^{1/2}.
inline double g_function(const SampledFunction& f, const Point& x, const ConeGrid& cone, const TestFunctionDictionary& dict) {
  double s = 0.0;
  for (double t : cone.t_levels) {
    const double a = intrinsic_A(f, x, t, dict);
    s += a * a;
  }
  return std::sqrt(s * cone.log_step);
}

// Conveniences that build the cone field for a single evaluation.

inline double area_function(const SampledFunction& f, const Point& x, double beta, const ConeGrid& cone,
                            const TestFunctionDictionary& dict) {
  return area_function(ConeField(f, cone, dict, 1), x, beta);
}

inline double gstar_function(const SampledFunction& f, const Point& x, double lambda, const ConeGrid& cone,
                             const TestFunctionDictionary& dict, int k_max = 6) {
  return gstar_function(ConeField(f, cone, dict, 1), x, lambda, k_max);
}

inline double gstar_via_apertures(const SampledFunction& f, const Point& x, double lambda, int K, const ConeGrid& cone,
                                  const TestFunctionDictionary& dict) {
  return gstar_via_apertures(ConeField(f, cone, dict, 1), x, lambda, K);
}

}  // namespace wisq
