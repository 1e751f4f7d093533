#include "svfb/eigenbasis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace svfb;

namespace {

constexpr double pi = std::numbers::pi;

// sigma = 1 + 4 pi^2 k^2 + pi^2 l (l + 1) for the sine weight (Fourier in x1,
// Legendre polynomials in cos(pi x2)), sorted ascending.
std::vector<double> analytic_sine_spectrum(int count) {
  std::vector<double> s;
  for (int k = 0; k <= 6; ++k) {
    for (int l = 0; l <= 12; ++l) {
      const double v = 1 + 4 * pi * pi * k * k + pi * pi * l * (l + 1);
      s.push_back(v);
      if (k > 0) s.push_back(v);  // cos and sin
    }
  }
  std::sort(s.begin(), s.end());
  s.resize(count);
  return s;
}

struct Fixture {
  WeightField w;
  OperatorPair op;
  explicit Fixture(int n, WeightProfile p = WeightProfile::sine())
      : w(build_weight(p, build_grid(n, n))), op(assemble_operator(w, w.grid)) {}
};

}  // namespace

TEST(Operator, SymmetricAndMassIsPositive) {
  Fixture f(12);
  EXPECT_EQ(f.op.stiffness.rows(), 144);
  const SparseMatrix diff = f.op.stiffness - SparseMatrix(f.op.stiffness.transpose());
  EXPECT_EQ(diff.norm(), 0.0);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(144);
  // 1^T M 1 = int rho0 = 2 / pi up to quadrature; constants lie in the kernel of A - M.
  EXPECT_NEAR(one.dot(f.op.mass * one), 2.0 / pi, 1e-4);
  EXPECT_LT(((f.op.stiffness - f.op.mass) * one).norm(), 1e-12);
}

TEST(Operator, GridMismatchThrows) {
  const WeightField w = build_weight(WeightProfile::sine(), build_grid(8, 8));
  EXPECT_THROW(assemble_operator(w, build_grid(8, 16)), std::invalid_argument);
}

TEST(Eigenbasis, FirstModeIsConstant) {
  Fixture f(16);
  const SpectralBasis b = solve_eigenbasis(f.op, 6);
  EXPECT_NEAR(b.sigma(0), 1.0, 1e-10);
  const Field m = b.mode(0);
  EXPECT_LT(m.maxCoeff() - m.minCoeff(), 1e-10);
  EXPECT_GT(m(0, 0), 0.0);
}

TEST(Eigenbasis, ConvergesToAnalyticSpectrum) {
  const auto exact = analytic_sine_spectrum(8);
  double prev = 0.0;
  for (int n : {12, 24}) {
    Fixture f(n);
    const SpectralBasis b = solve_eigenbasis(f.op, 8);
    double err = 0.0;
    for (int l = 0; l < 8; ++l) err = std::max(err, std::abs(b.sigma(l) - exact[l]) / exact[l]);
    if (prev > 0.0) EXPECT_GT(prev / err, 3.0);
    prev = err;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(Eigenbasis, VerificationDefects) {
  Fixture f(16);
  const SpectralBasis b = solve_eigenbasis(f.op, 12);
  const BasisReport r = verify_basis(b, f.op);
  EXPECT_LT(r.orthonormality_defect, 1e-10);
  EXPECT_LT(r.stiffness_offdiag, 1e-8);
  EXPECT_LT(r.eigen_residual, 1e-8);
  EXPECT_LT(r.spectral_identity_defect, 1e-8);
  for (int l = 1; l < b.n_modes(); ++l) EXPECT_GE(b.sigma(l), b.sigma(l - 1));
}

TEST(Eigenbasis, SubspaceMatchesDense) {
  Fixture f(16);
  EigenOptions dense;
  dense.method = EigenMethod::dense;
  EigenOptions sub;
  sub.method = EigenMethod::subspace;
  const SpectralBasis a = solve_eigenbasis(f.op, 10, dense);
  const SpectralBasis b = solve_eigenbasis(f.op, 10, sub);
  EXPECT_LT((a.sigma - b.sigma).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT(verify_basis(b, f.op).orthonormality_defect, 1e-10);
}

TEST(Eigenbasis, RejectsBadModeCounts) {
  Fixture f(8);
  EXPECT_THROW(solve_eigenbasis(f.op, 0), std::invalid_argument);
  EXPECT_THROW(solve_eigenbasis(f.op, 65), std::invalid_argument);
}

TEST(Eigenbasis, ProjectReconstructRoundTrip) {
  Fixture f(12);
  const SpectralBasis b = solve_eigenbasis(f.op, 10);
  Eigen::VectorXd coef = Eigen::VectorXd::LinSpaced(10, -1.0, 2.0);
  const Field field = b.reconstruct(coef);
  EXPECT_LT((b.project(field) - coef).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Eigenbasis, PerturbedWeightStillHasConstantGroundState) {
  Fixture f(16, WeightProfile::perturbed_sine(0.1));
  const SpectralBasis b = solve_eigenbasis(f.op, 4);
  EXPECT_NEAR(b.sigma(0), 1.0, 1e-10);
  EXPECT_LT(verify_basis(b, f.op).eigen_residual, 1e-8);
}

TEST(Eigenbasis, RegularityRatiosAreFinite) {
  Fixture f(16);
  const SpectralBasis b = solve_eigenbasis(f.op, 6);
  const RegularityReport r = basis_regularity(b, f.w, 4);
  ASSERT_EQ(r.modes.size(), 4u);
  EXPECT_TRUE(std::isfinite(r.sup_ratio));
  // The constant mode has no derivatives at all.
  EXPECT_LT(r.modes[0].sup_ratio, 1e-8);
}
