#include "svfb/linearized.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svfb {

namespace {

// Index k and weight s with t = (1 - s) t_k + s t_{k+1}, clamped.
std::pair<std::size_t, double> bracket(const std::vector<double>& times, double t) {
  if (times.size() == 1 || t <= times.front()) return {0, 0.0};
  if (t >= times.back()) return {times.size() - 2, 1.0};
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  return {k, (t - times[k]) / (times[k + 1] - times[k])};
}

TensorField blend(const TensorField& a, const TensorField& b, double s) {
  TensorField out;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) out[r][c] = (1.0 - s) * a[r][c] + s * b[r][c];
  }
  return out;
}

Eigen::MatrixX2d nodal(const Eigen::MatrixX2d& lambda, const SpectralBasis& basis) {
  return basis.modes * lambda;
}

}  // namespace

std::pair<TensorField, TensorField> FrozenCoefficients::at(double t) const {
  if (times.empty()) throw std::logic_error("FrozenCoefficients: no samples");
  const auto [k, s] = bracket(times, t);
  if (times.size() == 1) return {metric[0], cofactor[0]};
  return {blend(metric[k], metric[k + 1], s), blend(cofactor[k], cofactor[k + 1], s)};
}

FrozenCoefficients freeze_coefficients(const std::vector<VectorField>& velocity_history,
                                       const std::vector<double>& times, const Grid& grid) {
  if (velocity_history.empty() || velocity_history.size() != times.size()) {
    throw std::invalid_argument("freeze_coefficients: history and times differ in length");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("freeze_coefficients: history must start at t = 0");
  }
  FrozenCoefficients fc;
  fc.times = times;
  FlowMapState state = FlowMapState::identity(grid, velocity_history.front());
  for (std::size_t n = 0; n < times.size(); ++n) {
    if (n > 0) state = advance_flow_map(state, velocity_history[n], times[n] - times[n - 1]);
    const KinematicTensors kt = deformation(state, grid);
    const Field inv_j2 = kt.jacobian.square().inverse();
    TensorField m, c;
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) {
        m[r][s] = inv_j2 * kt.metric[r][s];
        c[r][s] = inv_j2 * kt.cof[r][s];
      }
    }
    fc.metric.push_back(std::move(m));
    fc.cofactor.push_back(std::move(c));
    const BoundsReport br = check_bounds(kt);
    fc.elliptic = fc.elliptic && br.pass_b;
    fc.jacobian_ok = fc.jacobian_ok && br.pass_j;
    fc.bounds.push_back(br);
  }
  return fc;
}

GalerkinOperators::GalerkinOperators(const SpectralBasis& basis) : disc(basis.disc) {
  for (int k = 0; k < 2; ++k) grad[k] = disc->gradient[k] * basis.modes;
  dmu = disc->weight.cwiseProduct(disc->rho);
  dmu2 = dmu.cwiseProduct(disc->rho);
}

GalerkinSystem assemble_galerkin_system(const TensorField& metric, const TensorField& cofactor,
                                        const GalerkinOperators& ops) {
  const Discretization& d = *ops.disc;
  const Eigen::VectorXd c00 = ops.dmu.cwiseProduct(d.at_quadrature(metric[0][0]));
  const Eigen::VectorXd c11 = ops.dmu.cwiseProduct(d.at_quadrature(metric[1][1]));
  const Eigen::VectorXd c01 =
      ops.dmu.cwiseProduct(d.at_quadrature(0.5 * (metric[0][1] + metric[1][0])));
  const auto& g0 = ops.grad[0];
  const auto& g1 = ops.grad[1];

  GalerkinSystem sys;
  Eigen::MatrixXd cross = g0.transpose() * (c01.asDiagonal() * g1);
  sys.stiffness = g0.transpose() * (c00.asDiagonal() * g0);
  sys.stiffness.noalias() += g1.transpose() * (c11.asDiagonal() * g1);
  sys.stiffness += cross + cross.transpose();
  sys.stiffness = 0.5 * (sys.stiffness + sys.stiffness.transpose()).eval();

  sys.forcing.resize(ops.n_modes(), 2);
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(ops.n_modes());
    for (int k = 0; k < 2; ++k) {
      f.noalias() +=
          ops.grad[k].transpose() * ops.dmu2.cwiseProduct(d.at_quadrature(cofactor[k][i]));
    }
    sys.forcing.col(i) = f;
  }
  return sys;
}

GalerkinSystem assemble_galerkin_system(const FrozenCoefficients& frozen,
                                        const GalerkinOperators& ops, double t) {
  const auto [metric, cofactor] = frozen.at(t);
  return assemble_galerkin_system(metric, cofactor, ops);
}

GalerkinState GalerkinState::initial(Eigen::MatrixX2d lambda0, double t0) {
  GalerkinState s;
  s.times.push_back(t0);
  s.coefficients.push_back(std::move(lambda0));
  return s;
}

Eigen::MatrixX2d project_velocity(const VectorField& u0, const SpectralBasis& basis) {
  Eigen::MatrixX2d lambda(basis.n_modes(), 2);
  for (int i = 0; i < 2; ++i) lambda.col(i) = basis.project(u0[i]);
  return lambda;
}

VectorField reconstruct_velocity(const Eigen::MatrixX2d& lambda, const SpectralBasis& basis) {
  return {basis.reconstruct(lambda.col(0)), basis.reconstruct(lambda.col(1))};
}

namespace {

double theta_of(Scheme s) { return s == Scheme::implicit_euler ? 1.0 : 0.5; }

Eigen::MatrixX2d advance(const Eigen::MatrixX2d& lambda, const GalerkinSystem& now,
                         const GalerkinSystem& next, double dt, double theta, bool pressure) {
  const Eigen::Index m = lambda.rows();
  Eigen::MatrixX2d rhs = lambda;
  if (theta < 1.0) rhs.noalias() -= (1.0 - theta) * dt * (now.stiffness * lambda);
  if (pressure) rhs += dt * (theta * next.forcing + (1.0 - theta) * now.forcing);
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(m, m) + theta * dt * next.stiffness;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw std::runtime_error("step_linearized: I + theta dt K is not positive definite");
  }
  return ldlt.solve(rhs);
}

}  // namespace

GalerkinState step_linearized(GalerkinState state, const FrozenCoefficients& frozen,
                              const GalerkinOperators& ops, double dt, Scheme scheme,
                              bool pressure) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_linearized: dt must be positive");
  const double t = state.t();
  const GalerkinSystem now = assemble_galerkin_system(frozen, ops, t);
  const GalerkinSystem next = assemble_galerkin_system(frozen, ops, t + dt);
  Eigen::MatrixX2d lambda =
      advance(state.current(), now, next, dt, theta_of(scheme), pressure);
  state.times.push_back(t + dt);
  state.coefficients.push_back(std::move(lambda));
  return state;
}

GalerkinState solve_linearized(const Eigen::MatrixX2d& lambda0, const FrozenCoefficients& frozen,
                               const GalerkinOperators& ops, Scheme scheme, bool pressure) {
  GalerkinState state = GalerkinState::initial(lambda0, frozen.times.front());
  state.times.reserve(frozen.times.size());
  state.coefficients.reserve(frozen.times.size());
  const double theta = theta_of(scheme);
  GalerkinSystem now = assemble_galerkin_system(frozen.metric[0], frozen.cofactor[0], ops);
  for (std::size_t n = 1; n < frozen.times.size(); ++n) {
    GalerkinSystem next = assemble_galerkin_system(frozen.metric[n], frozen.cofactor[n], ops);
    const double dt = frozen.times[n] - frozen.times[n - 1];
    state.coefficients.push_back(advance(state.current(), now, next, dt, theta, pressure));
    state.times.push_back(frozen.times[n]);
    now = std::move(next);
  }
  return state;
}

double weak_residual(const GalerkinState& state, const FrozenCoefficients& frozen,
                     const SpectralBasis& basis, const GalerkinOperators& ops, int m, double t,
                     bool pressure) {
  if (m < 0 || m >= basis.n_modes()) {
    throw std::out_of_range("weak_residual: test mode index out of range");
  }
  const auto& ts = state.times;
  std::size_t idx = ts.size();
  const double tol = 1e-12 * std::max(1.0, std::abs(t));
  for (std::size_t n = 0; n < ts.size(); ++n) {
    if (std::abs(ts[n] - t) <= tol) idx = n;
  }
  if (idx == ts.size()) throw std::invalid_argument("weak_residual: t is not a history time");
  if (idx == 0) throw std::invalid_argument("weak_residual: needs a previous history entry");

  const double dt = ts[idx] - ts[idx - 1];
  const Eigen::MatrixX2d xa = nodal(state.coefficients[idx - 1], basis);
  const Eigen::MatrixX2d xb = nodal(state.coefficients[idx], basis);
  const Eigen::MatrixX2d xm = 0.5 * (xa + xb);
  const Eigen::VectorXd wm = basis.modes.col(m);
  const Discretization& d = *ops.disc;

  const Eigen::RowVector2d time_term = (basis.mass * wm).transpose() * (xb - xa) / dt;

  const auto [metric, cofactor] = frozen.at(0.5 * (ts[idx - 1] + ts[idx]));
  std::array<Eigen::VectorXd, 2> gw{d.gradient[0] * wm, d.gradient[1] * wm};
  std::array<Eigen::MatrixX2d, 2> gx{d.gradient[0] * xm, d.gradient[1] * xm};

  Eigen::RowVector2d visc = Eigen::RowVector2d::Zero();
  Eigen::RowVector2d pres = Eigen::RowVector2d::Zero();
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 2; ++j) {
      const Eigen::VectorXd c = ops.dmu.cwiseProduct(d.at_quadrature(metric[k][j]));
      visc += c.cwiseProduct(gw[k]).transpose() * gx[j];
    }
    if (pressure) {
      for (int i = 0; i < 2; ++i) {
        pres(i) += ops.dmu2.cwiseProduct(d.at_quadrature(cofactor[k][i])).dot(gw[k]);
      }
    }
  }
  return (time_term + visc - pres).cwiseAbs().maxCoeff();
}

UniformEstimateReport uniform_estimate_report(const GalerkinState& run,
                                              const SpectralBasis& basis,
                                              const GalerkinOperators& ops) {
  UniformEstimateReport r;
  std::vector<double> diss(run.times.size(), 0.0);
  for (std::size_t n = 0; n < run.times.size(); ++n) {
    const Eigen::MatrixX2d x = nodal(run.coefficients[n], basis);
    double e = 0.0;
    for (int i = 0; i < 2; ++i) e += x.col(i).dot(basis.mass * x.col(i));
    if (n == 0) r.initial_energy = e;
    r.sup_energy = std::max(r.sup_energy, e);
    for (int k = 0; k < 2; ++k) {
      const Eigen::MatrixX2d g = ops.grad[k] * run.coefficients[n];
      diss[n] += (ops.dmu.asDiagonal() * g.cwiseAbs2()).sum();
    }
  }
  for (std::size_t n = 1; n < run.times.size(); ++n) {
    r.dissipation += 0.5 * (run.times[n] - run.times[n - 1]) * (diss[n] + diss[n - 1]);
  }
  r.horizon = run.times.back() - run.times.front();
  const double lhs = r.sup_energy + r.dissipation;
  r.a = r.initial_energy > 0.0 ? lhs / r.initial_energy : 1.0;
  r.b = r.initial_energy > 0.0 || r.horizon <= 0.0 ? 0.0 : lhs / r.horizon;
  r.bound_holds = std::isfinite(lhs);
  return r;
}

void fit_affine_bound(std::vector<UniformEstimateReport>& runs) {
  if (runs.empty()) return;
  Eigen::MatrixXd design(runs.size(), 2);
  Eigen::VectorXd y(runs.size());
  for (std::size_t r = 0; r < runs.size(); ++r) {
    design(r, 0) = runs[r].initial_energy;
    design(r, 1) = runs[r].horizon;
    y(r) = runs[r].sup_energy + runs[r].dissipation;
  }
  Eigen::Vector2d ab = design.completeOrthogonalDecomposition().solve(y);
  ab = ab.cwiseMax(0.0);
  // Lift a until every run sits under the bound; the fit only sets the shape.
  double lift = 0.0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const double gap = y(r) - design.row(r).dot(ab);
    if (gap > 0.0 && design(r, 0) > 0.0) lift = std::max(lift, gap / design(r, 0));
  }
  ab(0) += lift;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    runs[r].a = ab(0);
    runs[r].b = ab(1);
    runs[r].bound_holds = y(r) <= design.row(r).dot(ab) * (1.0 + 1e-12) + 1e-300;
  }
}

bool mode_stable(const std::vector<UniformEstimateReport>& by_mode_count, double tol) {
  for (std::size_t k = 1; k < by_mode_count.size(); ++k) {
    const double a = by_mode_count[k - 1].sup_energy;
    const double b = by_mode_count[k].sup_energy;
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale > 0.0 && std::abs(a - b) / scale > tol) return false;
  }
  return true;
}

}  // namespace svfb
