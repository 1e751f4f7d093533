#include "svfb/calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace svfb;

namespace {
constexpr double pi = std::numbers::pi;

WeightField sine_weight(int n1, int n2) { return build_weight(WeightProfile::sine(), build_grid(n1, n2)); }
}  // namespace

TEST(FdWeights, ClassicStencils) {
  const auto c1 = fd_weights<double>({-1, 0, 1}, 0.0, 1);
  EXPECT_NEAR(c1[0], -0.5, 1e-15);
  EXPECT_NEAR(c1[1], 0.0, 1e-15);
  EXPECT_NEAR(c1[2], 0.5, 1e-15);
  const auto c2 = fd_weights<double>({-1, 0, 1}, 0.0, 2);
  EXPECT_NEAR(c2[0], 1.0, 1e-15);
  EXPECT_NEAR(c2[1], -2.0, 1e-15);
  const auto one_sided = fd_weights<double>({0, 1, 2}, 0.0, 1);
  EXPECT_NEAR(one_sided[0], -1.5, 1e-15);
  EXPECT_NEAR(one_sided[1], 2.0, 1e-15);
  EXPECT_NEAR(one_sided[2], -0.5, 1e-15);
  const auto c4 = fd_weights<long double>({-2, -1, 0, 1, 2}, 0.0L, 4);
  EXPECT_NEAR(static_cast<double>(c4[2]), 6.0, 1e-15);
}

TEST(Diff, FourierModeIsSecondOrder) {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g = build_grid(n, n);
    const Field f = g.sample([](double a, double) { return std::sin(2 * pi * a); });
    const Field exact = g.sample([](double a, double) { return 2 * pi * std::cos(2 * pi * a); });
    const double err = (diff(f, g, 1, 1) - exact).abs().maxCoeff();
    if (prev > 0.0) EXPECT_NEAR(prev / err, 4.0, 0.1);
    prev = err;
  }
}

TEST(Diff, ConstantsAndQuadraticsAreExact) {
  const Grid g = build_grid(8, 12);
  const Field c = g.constant(3.5);
  for (int order = 1; order <= 4; ++order) {
    EXPECT_LT(diff(c, g, 2, order).abs().maxCoeff(), 1e-9);
    EXPECT_LT(diff(c, g, 1, order).abs().maxCoeff(), 1e-9);
  }
  const Field q = g.sample([](double, double b) { return b * b; });
  EXPECT_LT((diff(q, g, 2, 2) - 2.0).abs().maxCoeff(), 1e-9);
  EXPECT_LT((diff(q, g, 2, 1) - 2.0 * g.x2_field()).abs().maxCoeff(), 1e-10);
}

TEST(Diff, NormalDerivativeConvergesNearEdges) {
  double prev = 0.0;
  for (int n : {16, 32, 64}) {
    const Grid g = build_grid(8, n);
    const Field f = g.sample([](double, double b) { return std::cos(3 * b); });
    const Field exact = g.sample([](double, double b) { return -9 * std::cos(3 * b); });
    const double err = (diff(f, g, 2, 2) - exact).abs().maxCoeff();
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
}

TEST(Diff, RejectsBadArguments) {
  const Grid g = build_grid(8, 8);
  const Field f = g.zeros();
  EXPECT_THROW(diff(f, g, 3, 1), std::invalid_argument);
  EXPECT_THROW(diff(f, g, 1, 5), std::invalid_argument);
  EXPECT_THROW(diff(f, g, 1, 0), std::invalid_argument);
  const Grid tiny = build_grid(4, 4);
  EXPECT_THROW(diff(tiny.zeros(), tiny, 2, 4), std::invalid_argument);
}

TEST(Diff, MixedCommutes) {
  const Grid g = build_grid(16, 16);
  const Field f = g.sample([](double a, double b) { return std::sin(2 * pi * a) * std::exp(b); });
  const Field ab = diff(diff(f, g, 1, 1), g, 2, 1);
  const Field ba = diff(diff(f, g, 2, 1), g, 1, 1);
  EXPECT_LT((ab - ba).abs().maxCoeff(), 1e-10);
  EXPECT_LT((diff_mixed(f, g, 1, 1) - ab).abs().maxCoeff(), 1e-10);
}

TEST(WeightedInner, PowersAndShapes) {
  const WeightField w = sine_weight(8, 16);
  const Field one = w.grid.constant(1.0);
  // Midpoint sum of sin^2 on a cell-centered grid is exactly 1/2.
  EXPECT_NEAR(weighted_inner(one, one, w, 2), 0.5, 1e-14);
  EXPECT_NEAR(weighted_inner(one, one, w, 1), 2.0 / pi, 2e-3);
  EXPECT_THROW(weighted_inner(one, one, w, 9), std::invalid_argument);
  EXPECT_THROW(weighted_inner(one, one, w, -1), std::invalid_argument);
  EXPECT_THROW(weighted_inner(Field::Zero(3, 3), one, w, 0), std::invalid_argument);
}

TEST(Hardy, ConstantFunctionGivesTwo) {
  const WeightField w = sine_weight(16, 32);
  const InequalityReport r = check_hardy_embedding(w.grid.constant(1.0), w, 0);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.constant, 2.0, 1e-12);
}

TEST(Hardy, ZeroIsDegenerate) {
  const WeightField w = sine_weight(16, 16);
  const InequalityReport r = check_hardy_embedding(w.grid.zeros(), w, 1);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(std::isnan(r.constant));
}

TEST(Interpolation, ConstantFunction) {
  const WeightField w = sine_weight(16, 64);
  const InequalityReport r = check_interpolation(w.grid.constant(1.0), w);
  EXPECT_NEAR(r.constant, 1.0 / std::sqrt(2.0 / pi), 1e-3);
}

TEST(Interpolation, ScaleInvariant) {
  const WeightField w = sine_weight(16, 16);
  const Field g = w.grid.sample([](double a, double b) { return std::cos(2 * pi * a) + b * b; });
  const double c = check_interpolation(g, w).constant;
  EXPECT_NEAR(check_interpolation(7.0 * g, w).constant, c, 1e-12);
  EXPECT_NEAR(check_interpolation(0.01 * g, w).constant, c, 1e-12);
}

TEST(TangentRatio, ZeroForX1IndependentWeight) {
  const WeightField w = sine_weight(16, 16);
  for (int l = 1; l <= 4; ++l) EXPECT_LT(tangent_ratio(w, l), 1e-9);
  EXPECT_THROW(tangent_ratio(w, 0), std::invalid_argument);
  EXPECT_THROW(tangent_ratio(w, 5), std::invalid_argument);
}

TEST(TangentRatio, PerturbedSineMatchesSupremum) {
  // sup |0.2 pi cos(2 pi x1)| / (1 + 0.1 sin(2 pi x1)) = 0.2 pi / sqrt(1 - 0.01).
  const WeightField w = build_weight(WeightProfile::perturbed_sine(0.1), build_grid(128, 16));
  EXPECT_NEAR(tangent_ratio(w, 1), 0.2 * pi / std::sqrt(0.99), 2e-3);
}

TEST(RandomSamples, DeterministicBySeed) {
  const auto a = random_samples(42, 3);
  const auto b = random_samples(42, 3);
  const auto c = random_samples(43, 3);
  EXPECT_EQ(a[2](0.3, 0.7), b[2](0.3, 0.7));
  EXPECT_NE(a[2](0.3, 0.7), c[2](0.3, 0.7));
  EXPECT_EQ(a[0].seed, 42u);
  // x1-periodic.
  EXPECT_NEAR(a[1](0.0, 0.4), a[1](1.0, 0.4), 1e-12);
}

TEST(Suites, StableUnderRefinement) {
  const auto samples = random_samples(7, 20);
  const auto coarse = hardy_suite(sine_weight(32, 32), samples, 1);
  const auto fine = hardy_suite(sine_weight(32, 64), samples, 1);
  EXPECT_LT(std::abs(coarse.max_constant - fine.max_constant) / fine.max_constant, 0.1);
  EXPECT_EQ(coarse.reports.size(), 20u);
  EXPECT_LE(coarse.min_constant, coarse.max_constant);
  const auto ic = interpolation_suite(sine_weight(32, 32), samples);
  const auto jf = interpolation_suite(sine_weight(32, 64), samples);
  EXPECT_LT(std::abs(ic.max_constant - jf.max_constant) / jf.max_constant, 0.1);
}

TEST(Report, CsvRow) {
  InequalityReport r;
  r.name = "hardy_alpha0";
  r.lhs = 1.0;
  r.rhs = 0.5;
  r.constant = 2.0;
  r.n1 = 8;
  r.n2 = 16;
  r.seed = 3;
  EXPECT_EQ(to_csv_row(r), "hardy_alpha0,1,0.5,2,8,16,3");
}

TEST(SurrogateHHalf, ConstantFunction) {
  const WeightField w = sine_weight(8, 64);
  EXPECT_NEAR(surrogate_h_half(w.grid.constant(1.0), w), std::sqrt(2.0 / pi), 1e-3);
}
