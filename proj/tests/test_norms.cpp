#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wisq/norms.hpp"

using namespace wisq;

namespace {

SampledFunction indicator(const Grid& g, double lo, double hi) {
  return SampledFunction::sample(g, [=](const Point& x) { return x[0] > lo && x[0] < hi ? 1.0 : 0.0; });
}

}  // namespace

TEST(LpNorm, IndicatorOfUnitSet) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  for (double p : {0.5, 2.0 / 3.0, 1.0, 2.0}) EXPECT_NEAR(lp_norm(indicator(g, 0, 1), Weight::constant(1.0), p), 1.0, 1e-12);
}

TEST(LpNorm, IndicatorUnderInverseSquareRoot) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  EXPECT_NEAR(lp_norm(indicator(g, 0, 1), Weight::power(-0.5), 2.0 / 3.0), std::pow(2.0, 1.5), 1e-3);
}

TEST(LpNorm, ZeroFunction) {
  const Grid g = make_grid(Cube::interval(-1, 1), 16);
  EXPECT_EQ(lp_norm(SampledFunction::zeros(g), Weight::constant(1.0), 0.7), 0.0);
  EXPECT_EQ(weak_lp_norm(SampledFunction::zeros(g), Weight::constant(1.0), 0.7), 0.0);
}

TEST(LpNorm, RejectsNonPositiveExponent) {
  const Grid g = make_grid(Cube::interval(-1, 1), 16);
  EXPECT_THROW(lp_norm(SampledFunction::zeros(g), Weight::constant(1.0), 0.0), InvalidArgument);
  EXPECT_THROW(weak_lp_norm(SampledFunction::zeros(g), Weight::constant(1.0), -1.0), InvalidArgument);
  std::vector<double> v(3), m(2);
  EXPECT_THROW(lp_norm(v, m, 1.0), InvalidArgument);
}

TEST(WeakNorm, IndicatorIsOne) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  EXPECT_NEAR(weak_lp_norm(indicator(g, 0, 1), Weight::constant(1.0), 2.0 / 3.0), 1.0, 1e-12);
}

TEST(WeakNorm, ClassicExtremal) {
  // x^{-3/2} on (0, 1]: lambda |{x < lambda^{-2/3}}|^{3/2} = 1 for every lambda >= 1.
  // Sampled at right cell edges so the staircase has exactly these level sets; midpoints overshoot by 2^{3/2} in the first cell.
  const Grid g = make_grid(Cube::interval(0, 1), 1 << 14);
  const double h = g.spacing();
  const auto f = SampledFunction::sample(g, [h](const Point& x) { return std::pow(x[0] + h / 2, -1.5); });
  EXPECT_NEAR(weak_lp_norm(f, Weight::constant(1.0), 2.0 / 3.0), 1.0, 0.05);
}

TEST(WeakNorm, LevelSetProfileShape) {
  const Grid g = make_grid(Cube::interval(0, 4), 4);
  const SampledFunction f(g, {3.0, -1.0, 3.0, 0.0});
  const auto prof = level_set_profile(f, Weight::constant(1.0));
  ASSERT_EQ(prof.levels.size(), 2u);
  EXPECT_EQ(prof.levels[0], 3.0);
  EXPECT_EQ(prof.measures[0], 2.0);
  EXPECT_EQ(prof.levels[1], 1.0);
  EXPECT_EQ(prof.measures[1], 3.0);
  // sup(3 * 2^{1/p}, 1 * 3^{1/p}) at p = 1 is 6.
  EXPECT_DOUBLE_EQ(weak_lp_norm(f, Weight::constant(1.0), 1.0), 6.0);
}

TEST(LipNorm, ConstantHasZeroOscillation) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  const auto b = SampledFunction::sample(g, [](const Point&) { return 3.25; });
  const CubeFamily fam = make_cube_family(g.domain(), {});
  EXPECT_NEAR(lip_norm(b, 0.5, fam), 0.0, 1e-12);
}

TEST(LipNorm, IdentityAtAlphaOne) {
  const Grid g = make_grid(Cube::interval(-2, 2), 4096);
  const auto b = SampledFunction::sample(g, [](const Point& x) { return x[0]; });
  const CubeFamily fam = make_cube_family(g.domain(), {});
  EXPECT_NEAR(lip_norm(b, 1.0, fam), 0.25, 1e-3);
}

TEST(LipNorm, IdentityAtHalfGrowsWithFamily) {
  const Grid g = make_grid(Cube::interval(-4, 4), 4096);
  const auto b = SampledFunction::sample(g, [](const Point& x) { return x[0]; });
  double prev = 0;
  for (double H : {1.0, 2.0, 4.0}) {
    CubeFamilyOptions o;
    o.max_side = H;
    const double v = lip_norm(b, 0.5, make_cube_family(g.domain(), o));
    EXPECT_NEAR(v, std::sqrt(H) / 4, 1e-2);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(LipNorm, RejectsBadOrder) {
  const Grid g = make_grid(Cube::interval(-1, 1), 16);
  EXPECT_THROW(lip_norm(SampledFunction::zeros(g), 0.0, make_cube_family(g.domain(), {})), InvalidArgument);
}

TEST(Superposition, BoundAtTwoThirds) { EXPECT_DOUBLE_EQ(superposition_bound(2.0 / 3.0), 4.0); }

TEST(Superposition, SingleUnitFunction) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  const std::vector<SampledFunction> fs{indicator(g, 0, 1)};
  const std::vector<double> lam{1.0};
  const auto r = superpose(fs, lam, 2.0 / 3.0, Weight::constant(1.0));
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_TRUE(r.preconditions_hold);
  EXPECT_TRUE(r.holds);
}

TEST(Superposition, ZeroCoefficients) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  const std::vector<SampledFunction> fs{indicator(g, 0, 1), indicator(g, -1, 0)};
  const std::vector<double> lam{0.0, 0.0};
  EXPECT_EQ(superpose(fs, lam, 2.0 / 3.0, Weight::constant(1.0)).lhs, 0.0);
}

TEST(Superposition, TwoDisjointIndicators) {
  // Combined function 2^{-3/2} on a set of measure 2: weak norm 2^{-3/2} 2^{3/2} = 1.
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  const std::vector<SampledFunction> fs{indicator(g, 0, 1), indicator(g, -2, -1)};
  const double c = std::pow(2.0, -1.5);
  const std::vector<double> lam{c, c};
  const auto r = superpose(fs, lam, 2.0 / 3.0, Weight::constant(1.0));
  EXPECT_NEAR(r.sum_coeff, 1.0, 1e-12);
  EXPECT_NEAR(r.lhs, 1.0, 1e-12);
  EXPECT_TRUE(r.holds);
}

TEST(Superposition, MismatchedGridsRejected) {
  const std::vector<SampledFunction> fs{SampledFunction::zeros(make_grid(Cube::interval(0, 1), 8)),
                                        SampledFunction::zeros(make_grid(Cube::interval(0, 1), 16))};
  const std::vector<double> lam{1.0, 1.0};
  EXPECT_THROW(superpose(fs, lam, 0.5, Weight::constant(1.0)), InvalidArgument);
  EXPECT_THROW(superposition_bound(1.0), InvalidArgument);
}

class NormProperty : public ::testing::Test {
 protected:
  std::mt19937_64 rng{21};
  std::normal_distribution<double> nrm;
  std::uniform_real_distribution<double> unif{0.0, 1.0};

  SampledFunction random_function(const Grid& g) {
    std::vector<double> v(g.size());
    const double sparsity = unif(rng);
    for (double& x : v) x = unif(rng) < sparsity ? 0.0 : nrm(rng) * std::exp(2 * nrm(rng));
    return SampledFunction(g, std::move(v));
  }
  Weight random_weight() {
    const double k = unif(rng);
    if (k < 0.3) return Weight::constant(0.1 + 3 * unif(rng));
    return Weight::power(-0.9 + 1.8 * unif(rng), {nrm(rng), 0});
  }
};

TEST_F(NormProperty, ChebyshevWeakBelowStrong) {
  const Grid g = make_grid(Cube::interval(-3, 3), 200);
  for (int trial = 0; trial < 300; ++trial) {
    const auto f = random_function(g);
    const Weight w = random_weight();
    const double p = 0.2 + 3 * unif(rng);
    const auto m = w.cell_masses(g);
    EXPECT_LE(weak_lp_norm(f.values, m, p), lp_norm(f.values, m, p)) << trial;
  }
}

TEST_F(NormProperty, Homogeneity) {
  const Grid g = make_grid(Cube::interval(-3, 3), 200);
  for (int trial = 0; trial < 200; ++trial) {
    const auto f = random_function(g);
    const Weight w = random_weight();
    const double p = 0.2 + 3 * unif(rng), c = nrm(rng) * 10;
    const auto cf = f.scaled(c);
    const double s = lp_norm(f, w, p), ws = weak_lp_norm(f, w, p);
    EXPECT_NEAR(lp_norm(cf, w, p), std::abs(c) * s, 1e-12 * std::abs(c) * s);
    EXPECT_NEAR(weak_lp_norm(cf, w, p), std::abs(c) * ws, 1e-12 * std::abs(c) * ws);
  }
}

TEST_F(NormProperty, LipShiftInvariance) {
  const Grid g = make_grid(Cube::interval(-2, 2), 256);
  const CubeFamily fam = make_cube_family(g.domain(), {});
  for (int trial = 0; trial < 20; ++trial) {
    const double w = 1 + 5 * unif(rng);
    const auto b = SampledFunction::sample(g, [&](const Point& x) { return std::sin(w * x[0]) + x[0] * x[0]; });
    const double shift = 4 * nrm(rng);
    auto bs = b;
    for (double& v : bs.values) v += shift;
    const double alpha = 0.1 + 0.9 * unif(rng);
    const double base = lip_norm(b, alpha, fam);
    // Absolute slack: the shift's own rounding is |shift| * eps per sample.
    EXPECT_NEAR(lip_norm(bs, alpha, fam), base, 1e-12 * (base + std::abs(shift) + 1));
  }
}

TEST_F(NormProperty, SuperpositionOnRandomUnitFamilies) {
  const Grid g = make_grid(Cube::interval(-4, 4), 512);
  const double p = 2.0 / 3.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Weight w = random_weight();
    const auto m = w.cell_masses(g);
    const int count = 1 + int(unif(rng) * 8);
    std::vector<SampledFunction> fs;
    std::vector<double> lam;
    double total = 0;
    for (int j = 0; j < count; ++j) {
      auto f = random_function(g);
      const double n = weak_lp_norm(f.values, m, p);
      if (n == 0) continue;
      fs.push_back(f.scaled(1.0 / n));
      lam.push_back(nrm(rng));
      total += std::pow(std::abs(lam.back()), p);
    }
    if (fs.empty()) continue;
    for (double& l : lam) l /= std::pow(total, 1.0 / p);
    const auto r = superpose(fs, lam, p, w);
    EXPECT_TRUE(r.preconditions_hold);
    EXPECT_LE(r.lhs, r.bound + 1e-6);
  }
}
