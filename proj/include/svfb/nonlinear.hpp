#pragma once

#include "svfb/eigenbasis.hpp"
#include "svfb/grid.hpp"
#include "svfb/kinematics.hpp"
#include "svfb/linearized.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace svfb {

struct PicardSettings {
  double T = 0.05;
  int steps = 200;  ///< dt = T / steps, kept under T-halving
  double tolerance = 1e-8;
  int max_iterations = 50;
  Scheme scheme = Scheme::crank_nicolson;
  bool pressure = true;
  int max_halvings = 6;
  double stall_ratio = 0.9;
  int stall_count = 3;
};

/// Converged (or last attempted) trajectory on a uniform time grid.
struct Solution {
  std::vector<double> times;
  std::vector<FlowMapState> states;
  std::vector<Eigen::MatrixX2d> coefficients;
  std::vector<BoundsReport> bounds;
  bool converged = false;
  double T = 0.0;

  std::size_t size() const { return times.size(); }
};

struct PicardIteration {
  int attempt = 0;
  int iteration = 0;  ///< n, starting at 1
  double d = 0.0;     ///< sup_t ||sqrt(rho0)(v^(n) - v^(n-1))||
  double e = 0.0;     ///< (int_0^T ||sqrt(rho0) D(v^(n) - v^(n-1))||^2)^(1/2)
  double ratio = 0.0; ///< d_n / d_(n-1), NaN for n = 1
  /// sup_t (||.||_{L2_rho0} ||.||_{H1_rho0})^(1/2) of the difference, which
  /// bounds the unweighted L2 distance up to the interpolation constant.
  double interpolation = 0.0;
  double T = 0.0;
};

struct HalvingEvent {
  int attempt = 0;
  int iteration = 0;
  double T_before = 0.0;
  std::string reason;
};

struct PicardTrace {
  std::vector<PicardIteration> iterations;  ///< every attempt, in order
  std::vector<HalvingEvent> halvings;
  int final_attempt = 0;
  bool converged = false;
  std::string failure;

  /// Iterations of the final attempt only.
  std::vector<PicardIteration> final_iterations() const;
  int iteration_count() const { return static_cast<int>(final_iterations().size()); }
};

/// Builds a Solution from a coefficient history: velocities by reconstruction,
/// eta by the trapezoidal rule.
Solution assemble_solution(const GalerkinState& run, const SpectralBasis& basis);

std::pair<Solution, PicardTrace> picard_solve(const VectorField& u0, const SpectralBasis& basis,
                                              const PicardSettings& settings);

struct IterationDistance {
  double sup = 0.0;
  double dissipation = 0.0;
  double interpolation = 0.0;
};

/// Distances between two velocity histories on the same time grid.
IterationDistance iteration_distance(const std::vector<VectorField>& a,
                                     const std::vector<VectorField>& b,
                                     const std::vector<double>& times, const SpectralBasis& basis);
IterationDistance iteration_distance(const Solution& a, const Solution& b,
                                     const SpectralBasis& basis);

struct EnergyTerm {
  int l0 = 0;  ///< time derivatives
  int l1 = 0;  ///< tangential derivatives
  int l2 = 0;  ///< normal derivatives (weighted by rho0^l2)
  bool gradient = false;  ///< term carries a full gradient Dv on top of the counts
  bool elliptic = false;  ///< belongs to E_el
  double value = 0.0;
};

struct EnergyReport {
  double t = 0.0;
  double total = 0.0;
  double tangential = 0.0;  ///< E_en
  double elliptic = 0.0;    ///< E_el
  std::vector<EnergyTerm> terms;
  int order = 4;
  double m0 = 0.0;  ///< E(0)
  bool bound_holds = true;  ///< E(t) <= 2 M0 (1 + slack)
  double boundary_residual = 0.0;
};

inline constexpr double kEnergySlack = 0.1;

/// Truncated energy functional at history index `index`. Terms (parabolic
/// order: one time derivative counts as two space derivatives):
///   E_en: ||sqrt(rho0) dt^l0 v||^2          with 2 l0 <= order,
///         ||sqrt(rho0) dt^l0 d1^l1 Dv||^2   with 2 l0 + l1 + 1 <= order;
///   E_el: ||rho0^(l2/2) dt^l0 d1^l1 d2^l2 v||^2, l2 >= 2, 2 l0 + l1 + l2 <= order.
/// Time derivatives are one-sided differences on the stored grid, backward
/// where enough history exists and forward otherwise.
EnergyReport energy_functional(const Solution& sol, const WeightField& w, std::size_t index,
                               int order = 4);

/// max over i and both boundary components of |rho0_{,k} b^{kj} v^i_{,j}|,
/// extrapolated quadratically from the three nearest node rows.
double boundary_residual(const Solution& sol, const WeightField& w, std::size_t index);

}  // namespace svfb
