#pragma once

#include "svfb/grid.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <memory>

namespace svfb {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Continuous piecewise-bilinear trial space on the nodal grid. Cells join
/// neighbouring nodes; the half-cells between the first/last node row and
/// the boundary carry functions that are constant in x2. No boundary
/// condition is imposed on the space.
///
/// Every integral is evaluated with a 2x2 Gauss rule per cell, and the
/// sparse operators map nodal vectors (flat index i + n1 j) to values and
/// gradients at the quadrature points.
struct Discretization {
  Grid grid;
  Eigen::VectorXd weight;  ///< quadrature weights
  Eigen::VectorXd x1;
  Eigen::VectorXd x2;
  Eigen::VectorXd rho;     ///< rho0 at the quadrature points
  SparseMatrix value;      ///< nq x N
  std::array<SparseMatrix, 2> gradient;

  Eigen::Index quadrature_size() const { return weight.size(); }
  Eigen::Index dofs() const { return grid.size(); }

  /// Nodal field evaluated at the quadrature points through the trial space.
  Eigen::VectorXd at_quadrature(const Field& f) const;
};

std::shared_ptr<const Discretization> build_discretization(const WeightField& w);

inline Eigen::Map<const Eigen::VectorXd> flatten(const Field& f) {
  return {f.data(), f.size()};
}
inline Field unflatten(const Eigen::Ref<const Eigen::VectorXd>& v, const Grid& grid) {
  return Eigen::Map<const Eigen::ArrayXXd>(v.data(), grid.n1, grid.n2);
}

}  // namespace svfb
