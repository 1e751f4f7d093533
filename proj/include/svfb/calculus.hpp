#pragma once

#include "svfb/grid.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace svfb {

/// Finite-difference weights for the derivative of order `order` at `x0`
/// from values at `nodes` (Fornberg's recursion).
template <typename Scalar>
std::vector<Scalar> fd_weights(const std::vector<Scalar>& nodes, Scalar x0, int order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<Scalar>> c(n, std::vector<Scalar>(order + 1, Scalar(0)));
  Scalar c1 = 1;
  Scalar c4 = nodes[0] - x0;
  c[0][0] = 1;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    Scalar c2 = 1;
    const Scalar c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const Scalar c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<Scalar> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][order];
  return w;
}

/// Quadrature of rho0^power * f * g over the slab (midpoint in x2,
/// trapezoidal in periodic x1). Rejects power > 8.
double weighted_inner(const Field& f, const Field& g, const WeightField& w, int power);
/// Same as weighted_inner summed over the two vector components.
double weighted_inner(const VectorField& f, const VectorField& g, const WeightField& w,
                      int power);

/// Second-order accurate derivative of order 1..4 along axis 1 (periodic)
/// or axis 2 (centered inside, one-sided windows at the edges).
Field diff(const Field& f, const Grid& grid, int axis, int order);
/// Mixed derivative d1^l1 d2^l2 by composition (l1, l2 <= 4 each).
Field diff_mixed(const Field& f, const Grid& grid, int l1, int l2);

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;  ///< lhs / rhs, NaN when degenerate
  bool degenerate = false;
  std::string sample;
  int n1 = 0;
  int n2 = 0;
  std::uint64_t seed = 0;
  bool refinement_stable = true;
};

/// int rho0^alpha g^2  vs  int rho0^(alpha+2) (g^2 + |Dg|^2).
InequalityReport check_hardy_embedding(const Field& g, const WeightField& w, int alpha);
/// ||g||_{L2} vs ||g||_{L2_rho0}^(1/2) ||g||_{H1_rho0}^(1/2).
InequalityReport check_interpolation(const Field& g, const WeightField& w);
/// sup over nodes of |d1^l rho0| / rho0, l in 1..4.
double tangent_ratio(const WeightField& w, int l);
/// (int rho0 (g^2 + |Dg|^2))^(1/2), used in place of the H^(1/2) norm.
double surrogate_h_half(const Field& g, const WeightField& w);

/// Smooth random sample: truncated Fourier series in x1 times Legendre-type
/// polynomials in x2, with exactly evaluable values.
struct SmoothSample {
  std::vector<double> cos_coef;  ///< [k * n_poly + p]
  std::vector<double> sin_coef;
  int n_fourier = 0;
  int n_poly = 0;
  std::uint64_t seed = 0;  ///< generator seed of the suite it came from
  double operator()(double x1, double x2) const;
};

std::vector<SmoothSample> random_samples(std::uint64_t seed, int count, int n_fourier = 3,
                                         int n_poly = 4);

/// Max fitted constant over the sample suite on the given weight.
struct SampleSuiteResult {
  double max_constant = 0.0;
  double min_constant = 0.0;
  std::vector<InequalityReport> reports;
};
SampleSuiteResult hardy_suite(const WeightField& w, const std::vector<SmoothSample>& samples,
                              int alpha);
SampleSuiteResult interpolation_suite(const WeightField& w,
                                      const std::vector<SmoothSample>& samples);

/// CSV row: name,LHS,RHS,C,n1,n2,seed
std::string to_csv_row(const InequalityReport& r);

}  // namespace svfb
