#pragma once

#include "svfb/grid.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>

namespace svfb {

/// Lagrangian flow map and velocity at one instant. The map is stored as the
/// x1-periodic displacement eta - e.
struct FlowMapState {
  VectorField displacement;
  VectorField velocity;
  double t = 0.0;

  /// eta = e at t = 0 with the given velocity.
  static FlowMapState identity(const Grid& grid, VectorField velocity);
  static FlowMapState identity(const Grid& grid);
  /// Positions eta^i at the nodes.
  VectorField positions(const Grid& grid) const;
};

/// Per-node 2x2 tensor, component (r, c) stored as a nodal field.
using TensorField = std::array<std::array<Field, 2>, 2>;

/// Deformation gradient and derived kinematic quantities. Layouts:
///   grad[i][j] = eta^i_{,j}
///   cof[k][i]  = a_i^k   (upper index selects the row)
///   metric[k][j] = b^{kj} = a_l^k a_l^j
struct KinematicTensors {
  TensorField grad;
  Field jacobian;
  TensorField cof;
  TensorField metric;
};

struct BoundsReport {
  double j_min = 0.0;
  double j_max = 0.0;
  double b_min_eig = 0.0;
  double b22_min = 0.0;
  bool pass_j = false;
  bool pass_b = false;
  bool pass_b22 = false;
  bool pass() const { return pass_j && pass_b && pass_b22; }
};

/// Lower and upper Jacobian thresholds and the ellipticity floor of b.
inline constexpr double kJacobianLower = 0.9;
inline constexpr double kJacobianUpper = 1.1;
inline constexpr double kMetricFloor = 0.2;

/// Trapezoidal update eta' = eta + dt (v + v_new) / 2.
FlowMapState advance_flow_map(const FlowMapState& state, const VectorField& v_new, double dt);

/// Tensors from a displacement field; derivatives by `diff` (periodic in x1,
/// one-sided second order at the x2 edges).
KinematicTensors deformation(const VectorField& displacement, const Grid& grid);
inline KinematicTensors deformation(const FlowMapState& state, const Grid& grid) {
  return deformation(state.displacement, grid);
}
/// Tensors from a given deformation gradient (e.g. sampled analytically).
KinematicTensors tensors_from_gradient(TensorField grad);

/// max_i max_nodes |a_i^k_{,k}|.
double piola_residual(const KinematicTensors& tensors, const Grid& grid);

BoundsReport check_bounds(const KinematicTensors& tensors);

/// Smaller eigenvalue of the symmetric 2x2 matrix [[p, q], [q, r]].
template <typename Scalar>
Scalar min_eigenvalue_sym2(Scalar p, Scalar q, Scalar r) {
  using std::hypot;
  return Scalar(0.5) * ((p + r) - hypot(p - r, Scalar(2) * q));
}

}  // namespace svfb
