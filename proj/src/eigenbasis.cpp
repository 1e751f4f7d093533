#include "svfb/eigenbasis.hpp"

#include "svfb/calculus.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>

namespace svfb {

namespace {

// Columns of X made M-orthonormal by two passes of Cholesky QR.
void m_orthonormalize(Eigen::MatrixXd& x, const SparseMatrix& mass) {
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::MatrixXd gram = x.transpose() * (mass * x);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success) {
      throw EigenSolveError("subspace basis lost rank during orthonormalization", {});
    }
    x = llt.matrixU().solve<Eigen::OnTheRight>(x);
  }
}

Eigen::VectorXd mode_residuals(const SparseMatrix& a, const SparseMatrix& m,
                               const Eigen::MatrixXd& w, const Eigen::VectorXd& sigma) {
  const Eigen::MatrixXd aw = a * w;
  const Eigen::MatrixXd mw = m * w;
  Eigen::VectorXd r(sigma.size());
  for (Eigen::Index l = 0; l < sigma.size(); ++l) {
    r[l] = (aw.col(l) - sigma[l] * mw.col(l)).norm() / mw.col(l).norm();
  }
  return r;
}

// Re-orthonormalizes numerically degenerate clusters in M (modified
// Gram-Schmidt in solver order) and fixes signs so the largest entry of
// every mode is positive.
void tidy_modes(Eigen::MatrixXd& w, const Eigen::VectorXd& sigma, const SparseMatrix& mass) {
  const Eigen::Index m = sigma.size();
  Eigen::Index start = 0;
  while (start < m) {
    Eigen::Index end = start + 1;
    while (end < m &&
           std::abs(sigma[end] - sigma[start]) <= 1e-8 * std::max(1.0, std::abs(sigma[start]))) {
      ++end;
    }
    for (Eigen::Index l = start; l < end; ++l) {
      for (Eigen::Index k = start; k < l; ++k) {
        const double c = w.col(k).dot(mass * w.col(l));
        w.col(l) -= c * w.col(k);
      }
      w.col(l) /= std::sqrt(w.col(l).dot(mass * w.col(l)));
    }
    start = end;
  }
  for (Eigen::Index l = 0; l < m; ++l) {
    const double peak = w.col(l).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < w.rows(); ++k) {
      if (std::abs(w(k, l)) >= (1.0 - 1e-8) * peak) {
        if (w(k, l) < 0.0) w.col(l) = -w.col(l);
        break;
      }
    }
  }
}

void solve_dense(const OperatorPair& op, int n_modes, SpectralBasis& out) {
  const Eigen::MatrixXd a = Eigen::MatrixXd(op.stiffness);
  const Eigen::MatrixXd m = Eigen::MatrixXd(op.mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, m);
  if (es.info() != Eigen::Success) {
    throw EigenSolveError("dense generalized eigensolver failed", {});
  }
  out.sigma = es.eigenvalues().head(n_modes);
  out.modes = es.eigenvectors().leftCols(n_modes);
}

void solve_subspace(const OperatorPair& op, int n_modes, const EigenOptions& opt,
                    SpectralBasis& out) {
  const Eigen::Index dofs = op.stiffness.rows();
  const Eigen::Index p = std::min<Eigen::Index>(dofs, 2 * n_modes + 10);

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(op.stiffness);
  if (ldlt.info() != Eigen::Success) {
    throw EigenSolveError("factorization of the stiffness matrix failed", {});
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd x(dofs, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    for (Eigen::Index r = 0; r < dofs; ++r) x(r, c) = uni(rng);
  }
  x.col(0).setOnes();
  m_orthonormalize(x, op.mass);

  Eigen::VectorXd theta;
  Eigen::VectorXd res = Eigen::VectorXd::Constant(n_modes, INFINITY);
  for (int it = 0; it < opt.max_iterations; ++it) {
    Eigen::MatrixXd y = ldlt.solve(op.mass * x);
    m_orthonormalize(y, op.mass);
    Eigen::MatrixXd h = y.transpose() * (op.stiffness * y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
    theta = es.eigenvalues();
    x = y * es.eigenvectors();
    res = mode_residuals(op.stiffness, op.mass, x.leftCols(n_modes), theta.head(n_modes));
    if (res.maxCoeff() <= opt.tolerance) break;
  }
  if (!(res.maxCoeff() <= opt.tolerance)) {
    throw EigenSolveError("subspace iteration did not converge; max residual " +
                              std::to_string(res.maxCoeff()),
                          res);
  }
  out.sigma = theta.head(n_modes);
  out.modes = x.leftCols(n_modes);
}

}  // namespace

OperatorPair assemble_operator(const WeightField& w, const Grid& grid) {
  if (!(w.grid == grid)) throw std::invalid_argument("assemble_operator: grid mismatch");
  OperatorPair op;
  op.disc = build_discretization(w);
  const Discretization& d = *op.disc;
  const Eigen::VectorXd dmu = d.weight.cwiseProduct(d.rho);
  const SparseMatrix& v = d.value;
  op.mass = v.transpose() * dmu.asDiagonal() * v;
  SparseMatrix stiff = op.mass;
  for (int k = 0; k < 2; ++k) {
    const SparseMatrix& g = d.gradient[k];
    stiff += SparseMatrix(g.transpose() * dmu.asDiagonal() * g);
  }
  op.stiffness = stiff;
  // Products above are symmetric up to summation order; enforce it exactly.
  op.mass = 0.5 * (SparseMatrix(op.mass.transpose()) + op.mass);
  op.stiffness = 0.5 * (SparseMatrix(op.stiffness.transpose()) + op.stiffness);
  return op;
}

Field SpectralBasis::mode(int l) const { return unflatten(modes.col(l), disc->grid); }

Field SpectralBasis::reconstruct(const Eigen::Ref<const Eigen::VectorXd>& coef) const {
  const Eigen::VectorXd v = modes * coef;
  return unflatten(v, disc->grid);
}

Eigen::VectorXd SpectralBasis::project(const Field& f) const {
  return modes.transpose() * (mass * flatten(f));
}

SpectralBasis solve_eigenbasis(const OperatorPair& op, int n_modes, const EigenOptions& options) {
  const auto dofs = op.stiffness.rows();
  if (n_modes < 1 || n_modes > dofs) {
    throw std::invalid_argument("solve_eigenbasis: n_modes must be in [1, dofs]");
  }
  SpectralBasis out;
  out.mass = op.mass;
  out.disc = op.disc;
  EigenMethod method = options.method;
  if (method == EigenMethod::automatic) {
    method = (dofs <= options.dense_limit || 2 * n_modes + 10 >= dofs) ? EigenMethod::dense
                                                                       : EigenMethod::subspace;
  }
  if (method == EigenMethod::dense) {
    solve_dense(op, n_modes, out);
  } else {
    solve_subspace(op, n_modes, options, out);
  }
  tidy_modes(out.modes, out.sigma, op.mass);
  out.residuals = mode_residuals(op.stiffness, op.mass, out.modes, out.sigma);
  return out;
}

BasisReport verify_basis(const SpectralBasis& basis, const OperatorPair& op) {
  BasisReport r;
  const Eigen::MatrixXd& w = basis.modes;
  const Eigen::MatrixXd mw = w.transpose() * (op.mass * w);
  const Eigen::MatrixXd aw = w.transpose() * (op.stiffness * w);
  const Eigen::Index m = w.cols();
  r.orthonormality_defect = (mw - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff();
  Eigen::MatrixXd off = aw;
  off.diagonal().setZero();
  r.stiffness_offdiag = m > 1 ? off.cwiseAbs().maxCoeff() : 0.0;
  r.eigen_residual = mode_residuals(op.stiffness, op.mass, w, basis.sigma).maxCoeff();
  Eigen::MatrixXd spectral = aw - mw;
  spectral.diagonal() -= (basis.sigma.array() - 1.0).matrix();
  r.spectral_identity_defect = spectral.cwiseAbs().maxCoeff();
  return r;
}

RegularityReport basis_regularity(const SpectralBasis& basis, const WeightField& w, int count) {
  const Grid& g = w.grid;
  const int n = count < 0 ? basis.n_modes() : std::min(count, basis.n_modes());
  RegularityReport rep;
  for (int l = 0; l < n; ++l) {
    ModeRegularity mr;
    mr.mode = l;
    const Field f = basis.mode(l);
    mr.base_norm = std::sqrt(weighted_inner(f, f, w, 1));
    const Field d1 = diff(f, g, 1, 1);
    const Field d2 = diff(f, g, 2, 1);
    for (int l1 = 0; l1 <= 3; ++l1) {
      const Field a = l1 == 0 ? d1 : diff(d1, g, 1, l1);
      const Field b = l1 == 0 ? d2 : diff(d2, g, 1, l1);
      const double norm = std::sqrt(weighted_inner(a, a, w, 1) + weighted_inner(b, b, w, 1));
      mr.ratios.emplace_back("sqrt(rho0) d1^" + std::to_string(l1) + " Dw", norm / mr.base_norm);
    }
    for (int l2 = 2; l2 <= 4; ++l2) {
      for (int l1 = 0; l1 + l2 <= 4; ++l1) {
        const Field dd = diff_mixed(f, g, l1, l2);
        const double norm = std::sqrt(weighted_inner(dd, dd, w, l2));
        mr.ratios.emplace_back("rho0^(" + std::to_string(l2) + "/2) d1^" + std::to_string(l1) +
                                   " d2^" + std::to_string(l2) + " w",
                               norm / mr.base_norm);
      }
    }
    for (const auto& [name, ratio] : mr.ratios) mr.sup_ratio = std::max(mr.sup_ratio, ratio);
    rep.sup_ratio = std::max(rep.sup_ratio, mr.sup_ratio);
    rep.modes.push_back(std::move(mr));
  }
  return rep;
}

}  // namespace svfb
