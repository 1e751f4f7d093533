#pragma once

#include "svfb/discretization.hpp"
#include "svfb/grid.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace svfb {

/// Weak form of L w = -div(rho0 Dw) / rho0 + w on the trial space:
///   stiffness_ij = int rho0 (Dphi_i . Dphi_j + phi_i phi_j)
///   mass_ij      = int rho0 phi_i phi_j
/// The 1/rho0 factor cancels against the measure rho0 dx, so nothing is
/// ever divided by rho0 and no boundary condition is imposed.
struct OperatorPair {
  SparseMatrix stiffness;
  SparseMatrix mass;
  std::shared_ptr<const Discretization> disc;
};

OperatorPair assemble_operator(const WeightField& w, const Grid& grid);

enum class EigenMethod { automatic, dense, subspace };

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  /// Residual target for the iterative solver.
  double tolerance = 1e-10;
  int max_iterations = 2000;
  std::uint64_t seed = 0x5eed;
  /// automatic uses the dense solver up to this many dofs.
  int dense_limit = 600;
};

/// M-orthonormal eigenpairs A w = sigma M w, ascending sigma.
struct SpectralBasis {
  Eigen::MatrixXd modes;  ///< dofs x n_modes, columns are nodal mode vectors
  Eigen::VectorXd sigma;
  Eigen::VectorXd residuals;
  SparseMatrix mass;
  std::shared_ptr<const Discretization> disc;

  int n_modes() const { return static_cast<int>(sigma.size()); }
  /// Nodal field of mode l.
  Field mode(int l) const;
  /// Reconstruction sum_m coef_m w_m as a nodal field.
  Field reconstruct(const Eigen::Ref<const Eigen::VectorXd>& coef) const;
  /// L2_rho0 projection coefficients W^T M f.
  Eigen::VectorXd project(const Field& f) const;
};

class EigenSolveError : public std::runtime_error {
 public:
  EigenSolveError(const std::string& what, Eigen::VectorXd residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const Eigen::VectorXd& residuals() const { return residuals_; }

 private:
  Eigen::VectorXd residuals_;
};

SpectralBasis solve_eigenbasis(const OperatorPair& op, int n_modes,
                               const EigenOptions& options = {});

struct BasisReport {
  double orthonormality_defect = 0.0;  ///< max |W^T M W - I|
  double stiffness_offdiag = 0.0;      ///< max off-diagonal |W^T A W|
  double eigen_residual = 0.0;         ///< max_l |A w - sigma M w| / |M w|
  double spectral_identity_defect = 0.0;  ///< max |W^T (A - M) W - diag(sigma - 1)|
};

BasisReport verify_basis(const SpectralBasis& basis, const OperatorPair& op);

struct ModeRegularity {
  int mode = 0;
  double base_norm = 0.0;  ///< ||sqrt(rho0) w||
  std::vector<std::pair<std::string, double>> ratios;
  double sup_ratio = 0.0;
};

struct RegularityReport {
  std::vector<ModeRegularity> modes;
  double sup_ratio = 0.0;
};

/// Weighted derivative norms up to total order 4 relative to ||sqrt(rho0) w||:
/// sqrt(rho0) d1^l1 Dw (l1 <= 3) and rho0^(l2/2) d1^l1 d2^l2 w (l2 >= 2,
/// l1 + l2 <= 4). count < 0 checks every mode.
RegularityReport basis_regularity(const SpectralBasis& basis, const WeightField& w,
                                  int count = -1);

}  // namespace svfb
