// Randomized invariants in two dimensions and across modules.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wisq/atoms.hpp"
#include "wisq/intrinsic.hpp"
#include "wisq/norms.hpp"
#include "wisq/stats.hpp"

using namespace wisq;

namespace {

const TestFunctionDictionary& dict2d() {
  static const TestFunctionDictionary d = [] {
    DictionaryOptions o;
    o.dim = 2;
    o.resolution = 32;
    o.cycle = {Generator::antisymmetric_bump, Generator::bump_difference, Generator::modulated_bump};
    return build_dictionary(0.5, 4, 11, o);
  }();
  return d;
}

Atom atom2d(std::uint64_t seed, const Weight& w) {
  AtomOptions o;
  o.points_per_axis = 12;
  return build_atom(Cube({0.0, 0.0}, 1.0, 2), 0.5, 2.0, 0, w, seed, o);
}

ConeGrid cone2d() { return make_cone_grid(0.2, 1.6, 2.0, 2, 4.0); }

}  // namespace

TEST(Properties2D, HomogeneityOfAllOperators) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto& d = dict2d();
  const auto cone = cone2d();
  for (int trial = 0; trial < 3; ++trial) {
    const Atom a = atom2d(std::uint64_t(trial), Weight::constant(1.0, 2));
    const double c = 4 * u(rng);
    const auto cf = a.f.scaled(c);
    const ConeField f1(a.f, cone, d, 0), fc(cf, cone, d, 0);
    const Point x{u(rng), u(rng)};
    const auto rel = [c](double s, double b) {
      if (b == 0.0) return s == 0.0 ? 0.0 : 1.0;
      return std::abs(s - std::abs(c) * b) / (std::abs(c) * b);
    };
    EXPECT_LE(rel(intrinsic_A(cf, x, 0.4, d), intrinsic_A(a.f, x, 0.4, d)), 1e-12);
    EXPECT_LE(rel(g_function(cf, x, cone, d), g_function(a.f, x, cone, d)), 1e-12);
    EXPECT_LE(rel(area_function(fc, x, 1.0), area_function(f1, x, 1.0)), 1e-12);
    EXPECT_LE(rel(gstar_function(fc, x, 4.5, 3), gstar_function(f1, x, 4.5, 3)), 1e-12);
  }
}

TEST(Properties2D, ApertureAndDictionaryMonotone) {
  const auto& d = dict2d();
  TestFunctionDictionary sub = d;
  sub.members.resize(2);
  const auto cone = cone2d();
  const Atom a = atom2d(5, Weight::power(-1.0, {0.1, 0.1}, 2));
  const ConeField full(a.f, cone, d, 0), part(a.f, cone, sub, 0);
  for (const Point& x : {Point{0.0, 0.0}, Point{0.7, -0.3}, Point{1.5, 1.5}}) {
    double prev = 0;
    for (double beta : {0.5, 1.0, 2.0, 4.0}) {
      const double v = area_function(full, x, beta);
      EXPECT_GE(v, prev);
      prev = v;
    }
    EXPECT_LE(area_function(part, x, 1.0), area_function(full, x, 1.0));
    EXPECT_LE(gstar_function(part, x, 4.5, 3), gstar_function(full, x, 4.5, 3));
    EXPECT_LE(g_function(a.f, x, cone, sub), g_function(a.f, x, cone, d));
  }
}

TEST(Properties2D, ConstantsAnnihilated) {
  const auto& d = dict2d();
  const auto f = SampledFunction::sample(make_grid(Cube({0, 0}, 16.0, 2), 128), [](const Point&) { return 2.5; });
  const auto cone = make_cone_grid(0.5, 1.0, 2.0, 2, 4.0);
  const ConeField field(f, cone, d, 0);
  EXPECT_LE(g_function(f, {0.3, -0.2}, cone, d), 1e-10);
  EXPECT_LE(area_function(field, {0.3, -0.2}, 1.0), 1e-10);
  EXPECT_LE(gstar_function(field, {0.3, -0.2}, 4.5, 2), 1e-10);
}

TEST(CrossModule, ChebyshevOnOperatorOutputs) {
  // Weak <= strong holds for any sampled function, so also for square-function values.
  DictionaryOptions o;
  o.resolution = 256;
  const auto d = build_dictionary(0.5, 4, 2, o);
  AtomOptions ao;
  ao.points_per_axis = 32;
  for (const Weight& w : {Weight::constant(1.0), Weight::power(-0.5)}) {
    const Atom a = build_atom(Cube::interval(0.25, 0.75), 2.0 / 3.0, 2.0, 0, w, 3, ao);
    const auto cone = make_cone_grid(2 * a.f.grid.spacing(), 16.0, 1.5, 1);
    const Grid out = make_grid(Cube::interval(-4, 4), 256);
    std::vector<double> g(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) g[i] = g_function(a.f, out.point(i), cone, d);
    const auto m = w.cell_masses(out);
    for (double p : {2.0 / 3.0, 1.0, 2.0}) EXPECT_LE(weak_lp_norm(g, m, p), lp_norm(g, m, p));
  }
}

TEST(CrossModule, AtomicSumsStayWithinSuperpositionBound) {
  // Random finite atomic sums with sum |lambda|^p = 1: unit-weak-norm images g(a_j) superpose within (2-p)/(1-p).
  DictionaryOptions o;
  o.resolution = 256;
  const auto d = build_dictionary(0.5, 4, 2, o);
  const double p = 2.0 / 3.0;
  const Grid out = make_grid(Cube::interval(-4, 4), 128);
  const Weight w = Weight::power(-0.5);
  const auto m = w.cell_masses(out);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<SampledFunction> images;
  std::vector<double> lam;
  double total = 0;
  AtomOptions ao;
  ao.points_per_axis = 16;
  for (int j = 0; j < 5; ++j) {
    const double c = 2 * u(rng), s = 0.25 + 0.5 * std::abs(u(rng));
    const Atom a = build_atom(Cube::interval(c - s / 2, c + s / 2), p, 2.0, 0, w, std::uint64_t(j), ao);
    const auto cone = make_cone_grid(2 * a.f.grid.spacing(), 16.0, 1.5, 1);
    std::vector<double> g(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) g[i] = g_function(a.f, out.point(i), cone, d);
    const double n = weak_lp_norm(g, m, p);
    for (double& x : g) x /= n;
    images.emplace_back(out, g);
    lam.push_back(u(rng));
    total += std::pow(std::abs(lam.back()), p);
  }
  for (double& l : lam) l /= std::pow(total, 1 / p);
  const auto r = superpose(images, lam, p, w);
  EXPECT_TRUE(r.preconditions_hold);
  EXPECT_LE(r.lhs, 4.0);
}

TEST(CrossModule, WeightedNormsScaleWithWeight) {
  // ||f||_{L^p_{cw}} = c^{1/p} ||f||_{L^p_w}; the same for the weak norm.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nrm;
  const Grid g = make_grid(Cube::interval(-2, 2), 100);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(g.size());
    for (double& x : v) x = nrm(rng);
    const SampledFunction f(g, v);
    const double c = std::exp(nrm(rng)), p = 0.3 + std::abs(nrm(rng));
    const double a = lp_norm(f, Weight::constant(c), p), b = lp_norm(f, Weight::constant(1.0), p);
    EXPECT_NEAR(a, std::pow(c, 1 / p) * b, 1e-12 * a);
    const double wa = weak_lp_norm(f, Weight::constant(c), p), wb = weak_lp_norm(f, Weight::constant(1.0), p);
    EXPECT_NEAR(wa, std::pow(c, 1 / p) * wb, 1e-12 * wa);
  }
}
