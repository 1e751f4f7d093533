#include "svfb/nonlinear.hpp"

#include "svfb/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace svfb {

std::vector<PicardIteration> PicardTrace::final_iterations() const {
  std::vector<PicardIteration> out;
  for (const auto& it : iterations) {
    if (it.attempt == final_attempt) out.push_back(it);
  }
  return out;
}

namespace {

std::vector<VectorField> velocities(const std::vector<Eigen::MatrixX2d>& coefficients,
                                    const SpectralBasis& basis) {
  std::vector<VectorField> out;
  out.reserve(coefficients.size());
  for (const auto& c : coefficients) out.push_back(reconstruct_velocity(c, basis));
  return out;
}

}  // namespace

Solution assemble_solution(const GalerkinState& run, const SpectralBasis& basis) {
  const Grid& grid = basis.disc->grid;
  Solution sol;
  sol.times = run.times;
  sol.coefficients = run.coefficients;
  sol.T = run.times.back() - run.times.front();
  FlowMapState state = FlowMapState::identity(grid, reconstruct_velocity(run.coefficients[0], basis));
  state.t = run.times.front();
  sol.states.push_back(state);
  for (std::size_t n = 1; n < run.times.size(); ++n) {
    state = advance_flow_map(state, reconstruct_velocity(run.coefficients[n], basis),
                             run.times[n] - run.times[n - 1]);
    sol.states.push_back(state);
  }
  for (const auto& s : sol.states) sol.bounds.push_back(check_bounds(deformation(s, grid)));
  return sol;
}

IterationDistance iteration_distance(const std::vector<VectorField>& a,
                                     const std::vector<VectorField>& b,
                                     const std::vector<double>& times,
                                     const SpectralBasis& basis) {
  if (a.size() != b.size() || a.size() != times.size()) {
    throw std::invalid_argument("iteration_distance: histories on different time grids");
  }
  const Discretization& d = *basis.disc;
  const Eigen::VectorXd dmu = d.weight.cwiseProduct(d.rho);
  IterationDistance out;
  std::vector<double> diss(times.size(), 0.0);
  for (std::size_t n = 0; n < times.size(); ++n) {
    double l2 = 0.0;
    for (int i = 0; i < 2; ++i) {
      if (a[n][i].rows() != d.grid.n1 || a[n][i].cols() != d.grid.n2 ||
          b[n][i].rows() != d.grid.n1 || b[n][i].cols() != d.grid.n2) {
        throw std::invalid_argument("iteration_distance: field on a different grid");
      }
      const Field diff_field = a[n][i] - b[n][i];
      const auto v = flatten(diff_field);
      l2 += v.dot(basis.mass * v);
      for (int k = 0; k < 2; ++k) {
        const Eigen::VectorXd g = d.gradient[k] * v;
        diss[n] += dmu.dot(g.cwiseAbs2());
      }
    }
    out.sup = std::max(out.sup, std::sqrt(std::max(l2, 0.0)));
    out.interpolation = std::max(
        out.interpolation, std::sqrt(std::sqrt(std::max(l2, 0.0) * std::max(l2 + diss[n], 0.0))));
  }
  double integral = 0.0;
  for (std::size_t n = 1; n < times.size(); ++n) {
    integral += 0.5 * (times[n] - times[n - 1]) * (diss[n] + diss[n - 1]);
  }
  out.dissipation = std::sqrt(integral);
  return out;
}

IterationDistance iteration_distance(const Solution& a, const Solution& b,
                                     const SpectralBasis& basis) {
  if (a.times != b.times) throw std::invalid_argument("iteration_distance: time grids differ");
  std::vector<VectorField> va, vb;
  for (const auto& s : a.states) va.push_back(s.velocity);
  for (const auto& s : b.states) vb.push_back(s.velocity);
  return iteration_distance(va, vb, a.times, basis);
}

std::pair<Solution, PicardTrace> picard_solve(const VectorField& u0, const SpectralBasis& basis,
                                              const PicardSettings& settings) {
  if (!(settings.T > 0.0) || settings.steps < 1 || settings.max_iterations < 1) {
    throw std::invalid_argument("picard_solve: T, steps and max_iterations must be positive");
  }
  const Grid& grid = basis.disc->grid;
  const GalerkinOperators ops(basis);
  const Eigen::MatrixX2d lambda0 = project_velocity(u0, basis);

  PicardTrace trace;
  Solution best;
  double T = settings.T;
  for (int attempt = 0; attempt <= settings.max_halvings; ++attempt) {
    trace.final_attempt = attempt;
    std::vector<double> times(settings.steps + 1);
    for (int n = 0; n <= settings.steps; ++n) times[n] = T * n / settings.steps;

    GalerkinState previous;
    previous.times = times;
    previous.coefficients.assign(times.size(), lambda0);
    std::vector<VectorField> v_prev = velocities(previous.coefficients, basis);

    std::string halve_reason;
    int stalled = 0;
    double d_last = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    int n = 1;
    for (; n <= settings.max_iterations; ++n) {
      const FrozenCoefficients frozen = freeze_coefficients(v_prev, times, grid);
      const bool guard = std::all_of(frozen.bounds.begin(), frozen.bounds.end(),
                                     [](const BoundsReport& b) { return b.pass(); });
      if (!guard) {
        halve_reason = "bounds guard";
        break;
      }
      GalerkinState next = solve_linearized(lambda0, frozen, ops, settings.scheme,
                                            settings.pressure);
      std::vector<VectorField> v_next = velocities(next.coefficients, basis);
      const IterationDistance dist = iteration_distance(v_next, v_prev, times, basis);

      PicardIteration rec;
      rec.attempt = attempt;
      rec.iteration = n;
      rec.d = dist.sup;
      rec.e = dist.dissipation;
      rec.interpolation = dist.interpolation;
      rec.ratio = n == 1 ? std::numeric_limits<double>::quiet_NaN()
                         : (d_last > 0.0 ? dist.sup / d_last : 0.0);
      rec.T = T;
      trace.iterations.push_back(rec);
      d_last = dist.sup;
      previous = std::move(next);
      v_prev = std::move(v_next);

      if (dist.sup <= settings.tolerance) {
        converged = true;
        break;
      }
      stalled = rec.ratio > settings.stall_ratio ? stalled + 1 : 0;
      if (stalled >= settings.stall_count) {
        halve_reason = "non-contraction";
        break;
      }
    }
    if (!converged && halve_reason.empty()) halve_reason = "iteration limit";

    if (converged) {
      Solution sol = assemble_solution(previous, basis);
      sol.converged = true;
      trace.converged = true;
      return {std::move(sol), std::move(trace)};
    }
    if (previous.coefficients.size() == times.size()) best = assemble_solution(previous, basis);
    trace.halvings.push_back({attempt, std::min(n, settings.max_iterations), T, halve_reason});
    T *= 0.5;
  }
  trace.converged = false;
  trace.failure = "no convergence after " + std::to_string(settings.max_halvings) +
                  " halvings; last reason: " + trace.halvings.back().reason;
  // The last halving event refers to an attempt that was never run.
  trace.halvings.pop_back();
  best.converged = false;
  return {std::move(best), std::move(trace)};
}

namespace {

// d^l v / dt^l at history index `index`, one-sided first-order stencil.
VectorField time_derivative(const Solution& sol, std::size_t index, int l) {
  if (l == 0) return sol.states[index].velocity;
  const std::size_t count = static_cast<std::size_t>(l) + 1;
  if (sol.size() < count) {
    throw std::invalid_argument("energy_functional: history too short for time derivatives");
  }
  const std::size_t start = index >= static_cast<std::size_t>(l) ? index - l : 0;
  std::vector<double> nodes(count);
  for (std::size_t k = 0; k < count; ++k) nodes[k] = sol.times[start + k];
  const std::vector<double> c = fd_weights(nodes, sol.times[index], l);
  const Field& v0 = sol.states[index].velocity[0];
  VectorField out{Field::Zero(v0.rows(), v0.cols()), Field::Zero(v0.rows(), v0.cols())};
  for (std::size_t k = 0; k < count; ++k) {
    for (int i = 0; i < 2; ++i) out[i] += c[k] * sol.states[start + k].velocity[i];
  }
  return out;
}

double weighted_norm2(const VectorField& f, const WeightField& w, int power) {
  return weighted_inner(f, f, w, power);
}

VectorField apply(const VectorField& f, const Grid& g, int l1, int l2) {
  if (l1 == 0 && l2 == 0) return f;
  return {diff_mixed(f[0], g, l1, l2), diff_mixed(f[1], g, l1, l2)};
}

double energy_value(const Solution& sol, const WeightField& w, std::size_t index, int order,
                    std::vector<EnergyTerm>* terms, double* tangential, double* elliptic) {
  const Grid& g = w.grid;
  double en = 0.0, el = 0.0;
  for (int l0 = 0; 2 * l0 <= order; ++l0) {
    const VectorField vt = time_derivative(sol, index, l0);
    EnergyTerm base{l0, 0, 0, false, false, weighted_norm2(vt, w, 1)};
    en += base.value;
    if (terms) terms->push_back(base);
    for (int l1 = 0; 2 * l0 + l1 + 1 <= order; ++l1) {
      double value = 0.0;
      for (int k = 1; k <= 2; ++k) {
        value += weighted_norm2(apply(vt, g, l1 + (k == 1), k == 2), w, 1);
      }
      en += value;
      if (terms) terms->push_back({l0, l1, 0, true, false, value});
    }
    for (int l2 = 2; 2 * l0 + l2 <= order; ++l2) {
      for (int l1 = 0; 2 * l0 + l1 + l2 <= order; ++l1) {
        const double value = weighted_norm2(apply(vt, g, l1, l2), w, l2);
        el += value;
        if (terms) terms->push_back({l0, l1, l2, false, true, value});
      }
    }
  }
  if (tangential) *tangential = en;
  if (elliptic) *elliptic = el;
  return en + el;
}

}  // namespace

EnergyReport energy_functional(const Solution& sol, const WeightField& w, std::size_t index,
                               int order) {
  if (order < 2 || order > 4) {
    throw std::invalid_argument("energy_functional: truncation order must be in 2..4");
  }
  if (index >= sol.size()) throw std::out_of_range("energy_functional: index past the history");
  EnergyReport r;
  r.order = order;
  r.t = sol.times[index];
  r.total = energy_value(sol, w, index, order, &r.terms, &r.tangential, &r.elliptic);
  r.m0 = index == 0 ? r.total : energy_value(sol, w, 0, order, nullptr, nullptr, nullptr);
  r.bound_holds = r.total <= 2.0 * r.m0 * (1.0 + kEnergySlack);
  r.boundary_residual = boundary_residual(sol, w, index);
  return r;
}

double boundary_residual(const Solution& sol, const WeightField& w, std::size_t index) {
  if (index >= sol.size()) throw std::out_of_range("boundary_residual: index past the history");
  const Grid& g = w.grid;
  const FlowMapState& s = sol.states[index];
  const KinematicTensors kt = deformation(s, g);
  const std::array<Field, 2> drho{diff(w.values, g, 1, 1), diff(w.values, g, 2, 1)};
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    const std::array<Field, 2> dv{diff(s.velocity[i], g, 1, 1), diff(s.velocity[i], g, 2, 1)};
    Field q = g.zeros();
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 2; ++j) q += drho[k] * kt.metric[k][j] * dv[j];
    }
    for (int c = 0; c < g.n1; ++c) {
      const double bottom = extrapolate_to_edge(q(c, 0), q(c, 1), q(c, 2));
      const double top = extrapolate_to_edge(q(c, g.n2 - 1), q(c, g.n2 - 2), q(c, g.n2 - 3));
      worst = std::max({worst, std::abs(bottom), std::abs(top)});
    }
  }
  return worst;
}

}  // namespace svfb
