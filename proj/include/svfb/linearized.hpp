#pragma once

#include "svfb/eigenbasis.hpp"
#include "svfb/grid.hpp"
#include "svfb/kinematics.hpp"

#include <Eigen/Core>

#include <memory>
#include <utility>
#include <vector>

namespace svfb {

/// J^-2 b^{kj} and J^-2 a_i^k of a given velocity history, sampled at the
/// integrator's time nodes and linearly interpolated in between.
struct FrozenCoefficients {
  std::vector<double> times;
  std::vector<TensorField> metric;    ///< [k][j] = J^-2 b^{kj}
  std::vector<TensorField> cofactor;  ///< [k][i] = J^-2 a_i^k
  std::vector<BoundsReport> bounds;
  /// b^{kj} xi_k xi_j >= |xi|^2 / 5 at every sample.
  bool elliptic = true;
  /// 9/10 <= J <= 11/10 at every sample.
  bool jacobian_ok = true;

  /// Coefficients at time t (linear interpolation, clamped to the range).
  std::pair<TensorField, TensorField> at(double t) const;
};

/// Integrates eta from the history with the trapezoidal rule (same as
/// advance_flow_map) and evaluates the kinematic tensors at every sample.
FrozenCoefficients freeze_coefficients(const std::vector<VectorField>& velocity_history,
                                       const std::vector<double>& times, const Grid& grid);

/// Modal data reused by every assembly: mode gradients at the quadrature
/// points and the weighted quadrature measures.
struct GalerkinOperators {
  std::shared_ptr<const Discretization> disc;
  std::array<Eigen::MatrixXd, 2> grad;  ///< nq x n_modes
  Eigen::VectorXd dmu;                  ///< quadrature weight * rho0
  Eigen::VectorXd dmu2;                 ///< quadrature weight * rho0^2

  explicit GalerkinOperators(const SpectralBasis& basis);
  int n_modes() const { return static_cast<int>(grad[0].cols()); }
};

struct GalerkinSystem {
  Eigen::MatrixXd stiffness;  ///< K_{m1 m2} = int rho0 J^-2 b^{kj} w_{m1,j} w_{m2,k}
  Eigen::MatrixXd forcing;    ///< F(m, i) = int rho0^2 J^-2 a_i^k w_{m,k}
};

GalerkinSystem assemble_galerkin_system(const FrozenCoefficients& frozen,
                                        const GalerkinOperators& ops, double t);
/// Same assembly from coefficient fields given directly.
GalerkinSystem assemble_galerkin_system(const TensorField& metric, const TensorField& cofactor,
                                        const GalerkinOperators& ops);

enum class Scheme { implicit_euler, crank_nicolson };

/// Coefficient history; column i of each entry holds lambda^i.
struct GalerkinState {
  std::vector<double> times;
  std::vector<Eigen::MatrixX2d> coefficients;

  static GalerkinState initial(Eigen::MatrixX2d lambda0, double t0 = 0.0);
  const Eigen::MatrixX2d& current() const { return coefficients.back(); }
  double t() const { return times.back(); }
};

/// lambda(0) = W^T M u0, the L2_rho0 projection.
Eigen::MatrixX2d project_velocity(const VectorField& u0, const SpectralBasis& basis);
VectorField reconstruct_velocity(const Eigen::MatrixX2d& lambda, const SpectralBasis& basis);

/// One step of (I + theta dt K(t+dt)) lambda' = (I - (1-theta) dt K(t)) lambda
///   + dt (theta F(t+dt) + (1-theta) F(t)), theta = 1 or 1/2.
/// `pressure = false` drops the forcing F.
GalerkinState step_linearized(GalerkinState state, const FrozenCoefficients& frozen,
                              const GalerkinOperators& ops, double dt, Scheme scheme,
                              bool pressure = true);

/// Runs the integrator over every interval of `frozen.times`, reusing the
/// assembled system between consecutive steps.
GalerkinState solve_linearized(const Eigen::MatrixX2d& lambda0, const FrozenCoefficients& frozen,
                               const GalerkinOperators& ops, Scheme scheme,
                               bool pressure = true);

/// Weak-form defect of the step ending at history time t against test mode m,
/// evaluated at the step midpoint on the reconstructed fields:
///   |<rho0 dX/dt, w_m> + <rho0 J^-2 b DX, Dw_m> - <rho0^2 J^-2 a, Dw_m>|,
/// maximised over the two components.
double weak_residual(const GalerkinState& state, const FrozenCoefficients& frozen,
                     const SpectralBasis& basis, const GalerkinOperators& ops, int m, double t,
                     bool pressure = true);

struct UniformEstimateReport {
  double sup_energy = 0.0;      ///< sup_t ||sqrt(rho0) X||^2
  double dissipation = 0.0;     ///< int_0^T ||sqrt(rho0) DX||^2
  double initial_energy = 0.0;  ///< ||sqrt(rho0) X(0)||^2
  double horizon = 0.0;
  double a = 1.0;  ///< fitted bound sup + diss <= a E0 + b T
  double b = 0.0;
  bool bound_holds = true;
};

UniformEstimateReport uniform_estimate_report(const GalerkinState& run,
                                              const SpectralBasis& basis,
                                              const GalerkinOperators& ops);
/// Least-squares (a, b) >= 0 over several runs, then checks every run against it.
void fit_affine_bound(std::vector<UniformEstimateReport>& runs);
/// Relative change of sup_energy between consecutive mode counts stays below tol.
bool mode_stable(const std::vector<UniformEstimateReport>& by_mode_count, double tol);

}  // namespace svfb
