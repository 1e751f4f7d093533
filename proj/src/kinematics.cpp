#include "svfb/kinematics.hpp"

#include "svfb/calculus.hpp"

#include <stdexcept>

namespace svfb {

FlowMapState FlowMapState::identity(const Grid& grid, VectorField velocity) {
  FlowMapState s;
  s.displacement = {grid.zeros(), grid.zeros()};
  s.velocity = std::move(velocity);
  s.t = 0.0;
  return s;
}

FlowMapState FlowMapState::identity(const Grid& grid) {
  return identity(grid, {grid.zeros(), grid.zeros()});
}

VectorField FlowMapState::positions(const Grid& grid) const {
  return {displacement[0] + grid.x1_field(), displacement[1] + grid.x2_field()};
}

FlowMapState advance_flow_map(const FlowMapState& state, const VectorField& v_new, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("advance_flow_map: dt must be positive");
  for (int c = 0; c < 2; ++c) {
    if (v_new[c].rows() != state.velocity[c].rows() ||
        v_new[c].cols() != state.velocity[c].cols()) {
      throw std::invalid_argument("advance_flow_map: velocity field is on a different grid");
    }
  }
  FlowMapState next;
  for (int c = 0; c < 2; ++c) {
    next.displacement[c] = state.displacement[c] + 0.5 * dt * (state.velocity[c] + v_new[c]);
  }
  next.velocity = v_new;
  next.t = state.t + dt;
  return next;
}

KinematicTensors tensors_from_gradient(TensorField grad) {
  KinematicTensors k;
  k.grad = std::move(grad);
  const auto& g = k.grad;
  k.jacobian = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  k.cof[0][0] = g[1][1];
  k.cof[0][1] = -g[0][1];
  k.cof[1][0] = -g[1][0];
  k.cof[1][1] = g[0][0];
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      k.metric[r][c] = k.cof[r][0] * k.cof[c][0] + k.cof[r][1] * k.cof[c][1];
    }
  }
  return k;
}

KinematicTensors deformation(const VectorField& displacement, const Grid& grid) {
  TensorField grad;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      grad[i][j] = diff(displacement[i], grid, j + 1, 1);
      if (i == j) grad[i][j] += 1.0;
    }
  }
  return tensors_from_gradient(std::move(grad));
}

double piola_residual(const KinematicTensors& tensors, const Grid& grid) {
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const Field div = diff(tensors.cof[0][i], grid, 1, 1) + diff(tensors.cof[1][i], grid, 2, 1);
    worst = std::max(worst, div.abs().maxCoeff());
  }
  return worst;
}

BoundsReport check_bounds(const KinematicTensors& tensors) {
  BoundsReport r;
  r.j_min = tensors.jacobian.minCoeff();
  r.j_max = tensors.jacobian.maxCoeff();
  const auto& b = tensors.metric;
  const Field lam =
      0.5 * ((b[0][0] + b[1][1]) - ((b[0][0] - b[1][1]).square() + 4.0 * b[0][1].square()).sqrt());
  r.b_min_eig = lam.minCoeff();
  r.b22_min = b[1][1].minCoeff();
  r.pass_j = r.j_min >= kJacobianLower && r.j_max <= kJacobianUpper;
  r.pass_b = r.b_min_eig >= kMetricFloor;
  r.pass_b22 = r.b22_min >= kMetricFloor;
  return r;
}

}  // namespace svfb
