#pragma once

#include "svfb/grid.hpp"
#include "svfb/kinematics.hpp"
#include "svfb/nonlinear.hpp"

#include <Eigen/Core>

#include <vector>

namespace svfb {

using Point = Eigen::Vector2d;

/// Piecewise-bilinear interpolant of the flow map over the closed slab.
/// Vertex rows sit at x2 = 0, the node rows, and x2 = 1; the two boundary
/// rows carry values extrapolated linearly from the two nearest node rows.
/// Outside [0, 1] in x2 the edge cells are continued bilinearly.
class FlowMapInterpolant {
 public:
  FlowMapInterpolant(const FlowMapState& state, const Grid& grid);

  Point map(const Point& x) const;
  /// Deformation gradient of the interpolant, row i = d eta^i / dx.
  Eigen::Matrix2d gradient(const Point& x) const;
  /// Velocity interpolated the same way.
  Point velocity(const Point& x) const;
  /// Images of the boundary vertex rows, x1 = i h1 for i = 0..n1 (closing
  /// vertex repeated with its periodic shift).
  std::vector<Point> boundary_curve(bool top) const;
  const Grid& grid() const { return grid_; }
  double row(int r) const { return rows_[r]; }
  int rows() const { return static_cast<int>(rows_.size()); }

 private:
  struct Cell {
    int i0, i1, r;
    double s, u;  ///< local coordinates in the cell (s along x1)
  };
  Cell locate(const Point& x) const;
  Point interp(const std::array<Eigen::ArrayXXd, 2>& f, const Cell& c) const;

  Grid grid_;
  std::vector<double> rows_;
  std::array<Eigen::ArrayXXd, 2> disp_;  ///< n1 x (n2 + 2)
  std::array<Eigen::ArrayXXd, 2> vel_;
};

struct Preimage {
  Point x = Point::Zero();
  bool inside = false;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  ///< |eta(x) - y|
};

/// Damped Newton on the interpolated map, initial guess x = y, x1 left
/// unwrapped. Converged preimages with x2 outside [0, 1] are flagged as
/// outside the fluid domain.
std::vector<Preimage> invert_flow_map(const FlowMapInterpolant& map,
                                      const std::vector<Point>& query);
std::vector<Preimage> invert_flow_map(const FlowMapState& state, const Grid& grid,
                                      const std::vector<Point>& query);

struct BoundaryCurve {
  std::vector<Point> points;
  std::vector<Point> normals;  ///< outward unit normals
};

struct EulerianSnapshot {
  double t = 0.0;
  std::vector<Point> query;
  std::vector<Preimage> preimages;
  std::vector<double> rho;  ///< 0 outside
  std::vector<Point> u;     ///< 0 outside
  std::array<BoundaryCurve, 2> boundary;  ///< images of x2 = 0 and x2 = 1
  FlowMapState state;
  WeightField weight;
};

/// Query points: an nq1 x nq2 lattice over [0, 1) x [min y2, max y2] of Gamma(t).
std::vector<Point> query_lattice(const FlowMapInterpolant& map, int nq1, int nq2);

/// rho = rho0(x) / J(x), u = v(x) at the preimages x of the query points.
EulerianSnapshot eulerian_fields(const Solution& sol, const WeightField& w, std::size_t index,
                                 const std::vector<Point>& query);

/// max over both boundary components of |grad rho . D(u)|, D(u) the
/// symmetric gradient, extrapolated from the three nearest node rows.
double stress_free_residual(const EulerianSnapshot& snapshot);
double stress_free_residual(const FlowMapState& state, const WeightField& w);

struct MassReport {
  double eulerian = 0.0;
  double lagrangian = 0.0;
  double relative_error = 0.0;
  int failed_inversions = 0;
};

/// Eulerian mass by a degree-5 triangle rule over the image cells (integrand
/// evaluated through inversion) vs. Lagrangian mass int rho0 dx by tensor Gauss.
MassReport mass_balance(const FlowMapState& state, const WeightField& w);

/// True when no two non-adjacent segments intersect.
bool polyline_simple(const std::vector<Point>& curve);
/// Largest turning angle per unit length along the polyline.
double polyline_curvature(const std::vector<Point>& curve);

}  // namespace svfb
