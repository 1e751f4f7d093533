#pragma once

#include <Eigen/Core>

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace svfb {

/// Nodal scalar field, shape (n1, n2). Column-major, so the flat index of
/// node (i, j) is i + n1 * j.
using Field = Eigen::ArrayXXd;
/// Two-component nodal field (vector components 1 and 2).
using VectorField = std::array<Field, 2>;

/// Slab T x (0,1): periodic in x1, cell-centered nodes in x2 so no node
/// lies on the vacuum boundary x2 in {0, 1}.
struct Grid {
  int n1 = 0;
  int n2 = 0;
  double h1 = 0.0;
  double h2 = 0.0;

  double x1(int i) const { return i * h1; }
  double x2(int j) const { return (j + 0.5) * h2; }
  int size() const { return n1 * n2; }
  int index(int i, int j) const { return i + n1 * j; }

  Field zeros() const { return Field::Zero(n1, n2); }
  Field constant(double value) const { return Field::Constant(n1, n2, value); }
  /// Samples f(x1, x2) at every node.
  Field sample(const std::function<double(double, double)>& f) const;
  Field x1_field() const;
  Field x2_field() const;

  bool operator==(const Grid& other) const {
    return n1 == other.n1 && n2 == other.n2;
  }
};

/// Throws std::invalid_argument if n1 < 4 or n2 < 4.
Grid build_grid(int n1, int n2);

/// Distance to the boundary of the slab.
inline double boundary_distance(double x2) { return x2 < 1.0 - x2 ? x2 : 1.0 - x2; }

enum class ProfileKind { sine, parabolic, perturbed_sine, tabulated, custom };

/// Analytic description of the initial depth rho0(x1, x2).
class WeightProfile {
 public:
  static WeightProfile sine();
  static WeightProfile parabolic();
  /// (1 + eps sin(2 pi x1)) sin(pi x2); requires |eps| < 1/2.
  static WeightProfile perturbed_sine(double eps);
  /// Piecewise-linear rho(x2) through (x2, rho) rows; the optional third
  /// column is an x1-modulation amplitude m(x2) giving
  /// rho(x2) * (1 + m(x2) sin(2 pi x1)).
  static WeightProfile tabulated(std::vector<double> x2, std::vector<double> rho,
                                 std::vector<double> modulation = {});
  /// Reads a tabulated profile from CSV (header line optional).
  static WeightProfile tabulated_csv(const std::string& path);
  /// Arbitrary profile; the caller is responsible for smoothness.
  static WeightProfile custom(std::string name, std::function<double(double, double)> f,
                              bool x1_independent = false);

  double operator()(double x1, double x2) const { return f_(x1, x2); }
  ProfileKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double epsilon() const { return eps_; }
  bool x1_independent() const { return x1_independent_; }

 private:
  WeightProfile(ProfileKind kind, std::string name, std::function<double(double, double)> f,
                double eps, bool x1_independent)
      : kind_(kind), name_(std::move(name)), f_(std::move(f)), eps_(eps),
        x1_independent_(x1_independent) {}

  ProfileKind kind_;
  std::string name_;
  std::function<double(double, double)> f_;
  double eps_ = 0.0;
  bool x1_independent_ = false;
};

/// rho0 sampled on the grid together with its comparability constants
/// C1 d <= rho0 <= C2 d, estimated by dense sampling.
struct WeightField {
  Grid grid;
  WeightProfile profile;
  Field values;
  double c1 = 0.0;
  double c2 = 0.0;
};

WeightField build_weight(const WeightProfile& profile, const Grid& grid);

struct ValidationReport {
  bool pass = false;
  double ratio_min = 0.0;  ///< min rho0 / d over the dense sample
  double ratio_max = 0.0;  ///< max rho0 / d over the dense sample
  double boundary_residual = 0.0;
  double boundary_tolerance = 0.0;
  /// Estimated exponent p in rho0 ~ d^p near the boundary (1 for physical vacuum).
  double vanishing_order_min = 0.0;
  double vanishing_order_max = 0.0;
  std::vector<std::pair<int, int>> offending_nodes;
  std::vector<std::string> messages;
};

ValidationReport validate_physical_vacuum(const WeightField& w);

/// Quadratic extrapolation of column values at x2 = h/2, 3h/2, 5h/2 to x2 = 0.
inline double extrapolate_to_edge(double f0, double f1, double f2) {
  return 1.875 * f0 - 1.25 * f1 + 0.375 * f2;
}

/// Divided-difference check of a tabulated profile up to fourth order; returns
/// the largest absolute 4th difference quotient over the table.
double tabulated_smoothness(const WeightProfile& profile, const Grid& grid);

}  // namespace svfb
