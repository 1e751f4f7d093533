#include "svfb/linearized.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace svfb;

namespace {

constexpr double pi = std::numbers::pi;

struct Fixture {
  WeightField w;
  OperatorPair op;
  SpectralBasis basis;
  GalerkinOperators ops;
  explicit Fixture(int n = 16, int modes = 12)
      : w(build_weight(WeightProfile::sine(), build_grid(n, n))),
        op(assemble_operator(w, w.grid)),
        basis(solve_eigenbasis(op, modes)),
        ops(basis) {}
};

Fixture& shared() {
  static Fixture s;
  return s;
}

std::vector<double> uniform_times(double T, int steps) {
  std::vector<double> t(steps + 1);
  for (int k = 0; k <= steps; ++k) t[k] = T * k / steps;
  return t;
}

FrozenCoefficients frozen_from(const std::vector<double>& times, const VectorField& v,
                               const Grid& g) {
  return freeze_coefficients(std::vector<VectorField>(times.size(), v), times, g);
}

FrozenCoefficients identity_frozen(const std::vector<double>& times, const Grid& g) {
  return frozen_from(times, {g.zeros(), g.zeros()}, g);
}

VectorField sinsin(const Grid& g, double amp) {
  return {g.sample([amp](double a, double b) { return amp * std::sin(2 * pi * a) * std::sin(pi * b); }),
          g.zeros()};
}

double energy(const Eigen::MatrixX2d& lambda) { return lambda.squaredNorm(); }

}  // namespace

TEST(Freeze, ZeroHistoryIsIdentity) {
  const Grid g = build_grid(8, 8);
  const auto fc = identity_frozen(uniform_times(0.1, 4), g);
  ASSERT_EQ(fc.metric.size(), 5u);
  for (std::size_t n = 0; n < 5; ++n) {
    EXPECT_LT((fc.metric[n][0][0] - 1).abs().maxCoeff(), 1e-15);
    EXPECT_LT(fc.metric[n][0][1].abs().maxCoeff(), 1e-15);
    EXPECT_LT((fc.cofactor[n][1][1] - 1).abs().maxCoeff(), 1e-15);
  }
  EXPECT_TRUE(fc.elliptic);
  EXPECT_TRUE(fc.jacobian_ok);
}

TEST(Freeze, ConstantVelocityIsIdentity) {
  const Grid g = build_grid(8, 8);
  const auto fc = frozen_from(uniform_times(0.5, 5), {g.constant(0.3), g.constant(-1.0)}, g);
  EXPECT_LT((fc.metric.back()[1][1] - 1).abs().maxCoeff(), 1e-13);
  EXPECT_LT(fc.cofactor.back()[0][1].abs().maxCoeff(), 1e-13);
}

TEST(Freeze, ShearKeepsB22) {
  const Grid g = build_grid(8, 8);
  const auto fc = frozen_from(uniform_times(0.4, 8), {g.x2_field(), g.zeros()}, g);
  for (const auto& m : fc.metric) EXPECT_LT((m[1][1] - 1).abs().maxCoeff(), 1e-13);
  EXPECT_NEAR(fc.metric.back()[0][0](3, 3), 1 + 0.16, 1e-12);
}

TEST(Freeze, RejectsBadHistory) {
  const Grid g = build_grid(8, 8);
  EXPECT_THROW(freeze_coefficients({}, {}, g), std::invalid_argument);
  EXPECT_THROW(freeze_coefficients({{g.zeros(), g.zeros()}}, {0.1}, g), std::invalid_argument);
}

TEST(Freeze, InterpolatesLinearlyInTime) {
  const Grid g = build_grid(8, 8);
  const auto fc = frozen_from(uniform_times(0.4, 2), {g.x2_field(), g.zeros()}, g);
  const auto [m, c] = fc.at(0.1);
  EXPECT_NEAR(m[0][1](2, 2), 0.5 * (fc.metric[0][0][1](2, 2) + fc.metric[1][0][1](2, 2)), 1e-15);
  const auto [late, unused] = fc.at(5.0);
  EXPECT_EQ(late[0][0](1, 1), fc.metric.back()[0][0](1, 1));
}

TEST(Galerkin, IdentityStiffnessIsSpectral) {
  Fixture& s = shared();
  const auto fc = identity_frozen({0.0}, s.w.grid);
  const GalerkinSystem sys = assemble_galerkin_system(fc, s.ops, 0.0);
  const Eigen::MatrixXd expect = (s.basis.sigma.array() - 1.0).matrix().asDiagonal();
  EXPECT_LT((sys.stiffness - expect).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((sys.stiffness - sys.stiffness.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // Constant mode has zero gradient, so its forcing vanishes.
  EXPECT_LT(sys.forcing.row(0).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Galerkin, ForcingMatchesQuadratureOracle) {
  Fixture& s = shared();
  const auto fc = identity_frozen({0.0}, s.w.grid);
  const GalerkinSystem sys = assemble_galerkin_system(fc, s.ops, 0.0);
  // int rho0^2 dw/dx2 = -int 2 rho0 rho0' w after integrating by parts; rho0^2 vanishes on
  // the boundary. Compare against a fine midpoint rule of the right-hand side.
  const Discretization& d = *s.basis.disc;
  for (int m = 1; m < 4; ++m) {
    const Eigen::VectorXd w = d.value * s.basis.modes.col(m);
    const Eigen::VectorXd drho =
        d.x2.unaryExpr([](double b) { return pi * std::cos(pi * b); });
    const double by_parts = -(2.0 * d.weight.cwiseProduct(d.rho).cwiseProduct(drho)).dot(w);
    EXPECT_NEAR(sys.forcing(m, 1), by_parts, 5e-3 * (1 + std::abs(by_parts)));
  }
}

TEST(Galerkin, SymmetricForShear) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const auto fc = frozen_from(uniform_times(0.2, 4), {g.x2_field(), g.zeros()}, g);
  const GalerkinSystem sys = assemble_galerkin_system(fc, s.ops, 0.15);
  EXPECT_LT((sys.stiffness - sys.stiffness.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.stiffness);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Step, ZeroStaysZero) {
  Fixture& s = shared();
  const auto fc = identity_frozen(uniform_times(0.1, 2), s.w.grid);
  GalerkinState st = GalerkinState::initial(Eigen::MatrixX2d::Zero(12, 2));
  st = step_linearized(std::move(st), fc, s.ops, 0.05, Scheme::crank_nicolson, false);
  EXPECT_EQ(st.current().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(st.times.size(), 2u);
  EXPECT_THROW(step_linearized(st, fc, s.ops, 0.0, Scheme::implicit_euler), std::invalid_argument);
}

TEST(Step, ImplicitEulerScalarRecurrence) {
  Fixture& s = shared();
  const auto fc = identity_frozen(uniform_times(0.1, 2), s.w.grid);
  const int l = 4;
  Eigen::MatrixX2d lam = Eigen::MatrixX2d::Zero(12, 2);
  lam(l, 0) = 1.0;
  const double dt = 0.01;
  GalerkinState st = step_linearized(GalerkinState::initial(lam), fc, s.ops, dt,
                                     Scheme::implicit_euler, false);
  EXPECT_NEAR(st.current()(l, 0), 1.0 / (1.0 + dt * (s.basis.sigma(l) - 1.0)), 1e-9);
  EXPECT_LT(st.current()(l, 0), 1.0);
}

TEST(Step, CrankNicolsonEnergyIdentity) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const Eigen::MatrixX2d lam0 = project_velocity(sinsin(g, 1.0), s.basis);
  auto defect = [&](int steps) {
    const auto fc = identity_frozen(uniform_times(0.05, steps), g);
    const GalerkinState run = solve_linearized(lam0, fc, s.ops, Scheme::crank_nicolson, false);
    // Trapezoidal sum of 2 sum (sigma - 1) lambda^2.
    double diss = 0.0;
    auto rate = [&](const Eigen::MatrixX2d& l) {
      return 2.0 * (l.rowwise().squaredNorm().array() * (s.basis.sigma.array() - 1.0)).sum();
    };
    for (std::size_t n = 1; n < run.times.size(); ++n) {
      diss += 0.5 * (run.times[n] - run.times[n - 1]) *
              (rate(run.coefficients[n]) + rate(run.coefficients[n - 1]));
    }
    return std::abs(energy(run.current()) + diss - energy(lam0));
  };
  const double a = defect(50), b = defect(100);
  EXPECT_LT(a, 1e-3 * energy(lam0));
  EXPECT_GT(a / b, 3.5);
}

TEST(Step, ImplicitEulerEnergyMonotone) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const auto fc = identity_frozen(uniform_times(1.0, 20), g);
  const GalerkinState run = solve_linearized(project_velocity(sinsin(g, 1.0), s.basis), fc,
                                             s.ops, Scheme::implicit_euler, false);
  for (std::size_t n = 1; n < run.coefficients.size(); ++n) {
    EXPECT_LE(energy(run.coefficients[n]), energy(run.coefficients[n - 1]) * (1 + 1e-14));
  }
}

TEST(Step, SteppingMatchesBatchSolve) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const auto times = uniform_times(0.1, 4);
  const auto fc = frozen_from(times, {0.5 * g.x2_field(), g.zeros()}, g);
  const Eigen::MatrixX2d lam0 = project_velocity(sinsin(g, 0.2), s.basis);
  const GalerkinState batch = solve_linearized(lam0, fc, s.ops, Scheme::crank_nicolson);
  GalerkinState st = GalerkinState::initial(lam0);
  for (int k = 0; k < 4; ++k) st = step_linearized(std::move(st), fc, s.ops, 0.025, Scheme::crank_nicolson);
  EXPECT_LT((st.current() - batch.current()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(WeakResidual, Preconditions) {
  Fixture& s = shared();
  const auto fc = identity_frozen(uniform_times(0.1, 2), s.w.grid);
  GalerkinState st = GalerkinState::initial(Eigen::MatrixX2d::Zero(12, 2));
  EXPECT_THROW(weak_residual(st, fc, s.basis, s.ops, 0, 0.0), std::invalid_argument);
  st = step_linearized(std::move(st), fc, s.ops, 0.05, Scheme::crank_nicolson, false);
  EXPECT_EQ(weak_residual(st, fc, s.basis, s.ops, 3, 0.05, false), 0.0);
  EXPECT_THROW(weak_residual(st, fc, s.basis, s.ops, 12, 0.05), std::out_of_range);
  EXPECT_THROW(weak_residual(st, fc, s.basis, s.ops, -1, 0.05), std::out_of_range);
  EXPECT_THROW(weak_residual(st, fc, s.basis, s.ops, 0, 0.07), std::invalid_argument);
}

TEST(WeakResidual, CrankNicolsonSecondOrder) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const Eigen::MatrixX2d lam0 = project_velocity(sinsin(g, 0.5), s.basis);
  auto residual = [&](int steps) {
    const auto times = uniform_times(0.2, steps);
    const auto fc = frozen_from(times, {g.x2_field(), g.zeros()}, g);
    const GalerkinState run = solve_linearized(lam0, fc, s.ops, Scheme::crank_nicolson);
    double worst = 0.0;
    for (int m = 0; m < 12; ++m) worst = std::max(worst, weak_residual(run, fc, s.basis, s.ops, m, 0.2));
    return worst;
  };
  const double a = residual(20), b = residual(40);
  EXPECT_GT(a, 0.0);
  EXPECT_GT(a / b, 3.5);
}

TEST(UniformEstimate, ZeroRun) {
  Fixture& s = shared();
  const auto fc = identity_frozen(uniform_times(0.1, 4), s.w.grid);
  const GalerkinState run =
      solve_linearized(Eigen::MatrixX2d::Zero(12, 2), fc, s.ops, Scheme::crank_nicolson, false);
  const auto r = uniform_estimate_report(run, s.basis, s.ops);
  EXPECT_EQ(r.sup_energy, 0.0);
  EXPECT_EQ(r.dissipation, 0.0);
}

TEST(UniformEstimate, QuadraticInInitialData) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  const auto fc = identity_frozen(uniform_times(0.1, 10), g);
  auto report = [&](double amp) {
    const GalerkinState run = solve_linearized(project_velocity(sinsin(g, amp), s.basis), fc,
                                               s.ops, Scheme::crank_nicolson, false);
    return uniform_estimate_report(run, s.basis, s.ops);
  };
  const auto one = report(1.0), two = report(2.0);
  EXPECT_NEAR(two.initial_energy / one.initial_energy, 4.0, 1e-10);
  EXPECT_NEAR(two.sup_energy / one.sup_energy, 4.0, 1e-10);
  EXPECT_NEAR(two.dissipation / one.dissipation, 4.0, 1e-10);
  std::vector<UniformEstimateReport> runs{one, two};
  fit_affine_bound(runs);
  for (const auto& r : runs) EXPECT_TRUE(r.bound_holds);
}

TEST(UniformEstimate, StableUnderModeRefinement) {
  const WeightField w = build_weight(WeightProfile::sine(), build_grid(16, 16));
  const OperatorPair op = assemble_operator(w, w.grid);
  const auto times = uniform_times(0.05, 20);
  const auto fc = frozen_from(times, {0.2 * w.grid.x2_field(), w.grid.zeros()}, w.grid);
  std::vector<UniformEstimateReport> reports;
  for (int modes : {8, 16, 32}) {
    const SpectralBasis b = solve_eigenbasis(op, modes);
    const GalerkinOperators ops(b);
    const GalerkinState run = solve_linearized(project_velocity(sinsin(w.grid, 0.05), b), fc,
                                               ops, Scheme::crank_nicolson);
    reports.push_back(uniform_estimate_report(run, b, ops));
  }
  EXPECT_TRUE(mode_stable({reports[1], reports[2]}, 0.05));
}

TEST(Galerkin, DegenerateModeRotationLeavesFieldUnchanged) {
  Fixture& s = shared();
  const Grid& g = s.w.grid;
  // sigma_3 and sigma_4 form the cos/sin pair of the first x1 harmonic.
  ASSERT_NEAR(s.basis.sigma(2), s.basis.sigma(3), 1e-8);
  SpectralBasis rotated = s.basis;
  const double c = std::cos(0.7), sn = std::sin(0.7);
  rotated.modes.col(2) = c * s.basis.modes.col(2) - sn * s.basis.modes.col(3);
  rotated.modes.col(3) = sn * s.basis.modes.col(2) + c * s.basis.modes.col(3);
  const GalerkinOperators rops(rotated);
  const auto times = uniform_times(0.05, 10);
  const auto fc = frozen_from(times, {0.3 * g.x2_field(), g.zeros()}, g);
  const VectorField u0 = sinsin(g, 0.1);
  const GalerkinState a = solve_linearized(project_velocity(u0, s.basis), fc, s.ops, Scheme::crank_nicolson);
  const GalerkinState b = solve_linearized(project_velocity(u0, rotated), fc, rops, Scheme::crank_nicolson);
  const VectorField xa = reconstruct_velocity(a.current(), s.basis);
  const VectorField xb = reconstruct_velocity(b.current(), rotated);
  EXPECT_LT((xa[0] - xb[0]).abs().maxCoeff(), 1e-10);
  EXPECT_LT((xa[1] - xb[1]).abs().maxCoeff(), 1e-10);
}
