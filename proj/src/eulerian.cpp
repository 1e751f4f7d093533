#include "svfb/eulerian.hpp"

#include "svfb/calculus.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svfb {

namespace {

constexpr double kNewtonTol = 1e-12;
constexpr int kNewtonSteps = 50;
constexpr double kInsideSlack = 1e-12;

std::array<Eigen::ArrayXXd, 2> extend_rows(const VectorField& f, int n1, int n2) {
  std::array<Eigen::ArrayXXd, 2> out;
  for (int c = 0; c < 2; ++c) {
    out[c].resize(n1, n2 + 2);
    out[c].middleCols(1, n2) = f[c];
    out[c].col(0) = 1.5 * f[c].col(0) - 0.5 * f[c].col(1);
    out[c].col(n2 + 1) = 1.5 * f[c].col(n2 - 1) - 0.5 * f[c].col(n2 - 2);
  }
  return out;
}

double cross2(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

FlowMapInterpolant::FlowMapInterpolant(const FlowMapState& state, const Grid& grid)
    : grid_(grid) {
  rows_.reserve(grid.n2 + 2);
  rows_.push_back(0.0);
  for (int j = 0; j < grid.n2; ++j) rows_.push_back(grid.x2(j));
  rows_.push_back(1.0);
  disp_ = extend_rows(state.displacement, grid.n1, grid.n2);
  vel_ = extend_rows(state.velocity, grid.n1, grid.n2);
}

FlowMapInterpolant::Cell FlowMapInterpolant::locate(const Point& x) const {
  Cell c;
  const double x1 = x.x() - std::floor(x.x());
  c.i0 = std::min(static_cast<int>(x1 / grid_.h1), grid_.n1 - 1);
  c.i1 = (c.i0 + 1) % grid_.n1;
  c.s = x1 / grid_.h1 - c.i0;
  const int n2 = grid_.n2;
  const double x2 = x.y();
  if (x2 < rows_[1]) {
    c.r = 0;
  } else if (x2 >= rows_[n2]) {
    c.r = n2;
  } else {
    c.r = std::clamp(1 + static_cast<int>((x2 - rows_[1]) / grid_.h2), 1, n2 - 1);
  }
  c.u = (x2 - rows_[c.r]) / (rows_[c.r + 1] - rows_[c.r]);
  return c;
}

Point FlowMapInterpolant::interp(const std::array<Eigen::ArrayXXd, 2>& f, const Cell& c) const {
  Point out;
  for (int k = 0; k < 2; ++k) {
    out[k] = (1 - c.s) * (1 - c.u) * f[k](c.i0, c.r) + c.s * (1 - c.u) * f[k](c.i1, c.r) +
             (1 - c.s) * c.u * f[k](c.i0, c.r + 1) + c.s * c.u * f[k](c.i1, c.r + 1);
  }
  return out;
}

Point FlowMapInterpolant::map(const Point& x) const { return x + interp(disp_, locate(x)); }

Point FlowMapInterpolant::velocity(const Point& x) const { return interp(vel_, locate(x)); }

Eigen::Matrix2d FlowMapInterpolant::gradient(const Point& x) const {
  const Cell c = locate(x);
  const double dr = rows_[c.r + 1] - rows_[c.r];
  Eigen::Matrix2d g = Eigen::Matrix2d::Identity();
  for (int k = 0; k < 2; ++k) {
    const auto& f = disp_[k];
    g(k, 0) += ((1 - c.u) * (f(c.i1, c.r) - f(c.i0, c.r)) +
                c.u * (f(c.i1, c.r + 1) - f(c.i0, c.r + 1))) / grid_.h1;
    g(k, 1) += ((1 - c.s) * (f(c.i0, c.r + 1) - f(c.i0, c.r)) +
                c.s * (f(c.i1, c.r + 1) - f(c.i1, c.r))) / dr;
  }
  return g;
}

std::vector<Point> FlowMapInterpolant::boundary_curve(bool top) const {
  const int col = top ? grid_.n2 + 1 : 0;
  std::vector<Point> out;
  out.reserve(grid_.n1 + 1);
  for (int i = 0; i <= grid_.n1; ++i) {
    const int k = i % grid_.n1;
    out.emplace_back(i * grid_.h1 + disp_[0](k, col), rows_[col] + disp_[1](k, col));
  }
  return out;
}

std::vector<Preimage> invert_flow_map(const FlowMapInterpolant& map,
                                      const std::vector<Point>& query) {
  std::vector<Preimage> out(query.size());
  for (std::size_t q = 0; q < query.size(); ++q) {
    const Point& y = query[q];
    Preimage& p = out[q];
    Point x = y;
    Point f = map.map(x) - y;
    double r = f.norm();
    for (; p.iterations < kNewtonSteps && r > kNewtonTol; ++p.iterations) {
      const Eigen::Matrix2d g = map.gradient(x);
      if (!(g.determinant() > 0.0)) break;
      const Point dx = -g.partialPivLu().solve(f);
      double alpha = 1.0;
      Point trial = x + dx;
      Point ft = map.map(trial) - y;
      while (ft.norm() >= (1.0 - 1e-4 * alpha) * r && alpha > 1e-6) {
        alpha *= 0.5;
        trial = x + alpha * dx;
        ft = map.map(trial) - y;
      }
      x = trial;
      f = ft;
      r = f.norm();
    }
    p.x = x;
    p.residual = r;
    p.converged = r <= kNewtonTol;
    p.inside = p.converged && x.y() >= -kInsideSlack && x.y() <= 1.0 + kInsideSlack;
  }
  return out;
}

std::vector<Preimage> invert_flow_map(const FlowMapState& state, const Grid& grid,
                                      const std::vector<Point>& query) {
  return invert_flow_map(FlowMapInterpolant(state, grid), query);
}

std::vector<Point> query_lattice(const FlowMapInterpolant& map, int nq1, int nq2) {
  if (nq1 < 1 || nq2 < 1) throw std::invalid_argument("query_lattice: empty lattice");
  double lo = 1e300, hi = -1e300;
  for (const auto& p : map.boundary_curve(false)) lo = std::min(lo, p.y());
  for (const auto& p : map.boundary_curve(true)) hi = std::max(hi, p.y());
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(nq1) * nq2);
  for (int j = 0; j < nq2; ++j) {
    for (int i = 0; i < nq1; ++i) {
      out.emplace_back(static_cast<double>(i) / nq1, lo + (j + 0.5) * (hi - lo) / nq2);
    }
  }
  return out;
}

namespace {

BoundaryCurve with_normals(std::vector<Point> pts, bool top) {
  BoundaryCurve c;
  const int n = static_cast<int>(pts.size()) - 1;  // last vertex closes the period
  const Point shift(1.0, 0.0);
  for (int k = 0; k <= n; ++k) {
    const Point prev = k == 0 ? pts[n - 1] - shift : pts[k - 1];
    const Point next = k == n ? pts[1] + shift : pts[k + 1];
    const Point tau = (next - prev).normalized();
    c.normals.push_back(top ? Point(-tau.y(), tau.x()) : Point(tau.y(), -tau.x()));
  }
  c.points = std::move(pts);
  return c;
}

}  // namespace

EulerianSnapshot eulerian_fields(const Solution& sol, const WeightField& w, std::size_t index,
                                 const std::vector<Point>& query) {
  if (index >= sol.size()) throw std::out_of_range("eulerian_fields: index past the history");
  const FlowMapInterpolant map(sol.states[index], w.grid);
  EulerianSnapshot snap{sol.times[index], query, invert_flow_map(map, query), {}, {}, {},
                        sol.states[index], w};
  snap.rho.assign(query.size(), 0.0);
  snap.u.assign(query.size(), Point::Zero());
  for (std::size_t q = 0; q < query.size(); ++q) {
    const Preimage& p = snap.preimages[q];
    if (!p.inside) continue;
    const double x1 = p.x.x() - std::floor(p.x.x());
    const double x2 = std::clamp(p.x.y(), 0.0, 1.0);
    snap.rho[q] = w.profile(x1, x2) / map.gradient(p.x).determinant();
    snap.u[q] = map.velocity(p.x);
  }
  snap.boundary[0] = with_normals(map.boundary_curve(false), false);
  snap.boundary[1] = with_normals(map.boundary_curve(true), true);
  return snap;
}

double stress_free_residual(const FlowMapState& state, const WeightField& w) {
  const Grid& g = w.grid;
  const KinematicTensors kt = deformation(state, g);
  const Field inv_j = kt.jacobian.inverse();
  // Eulerian derivative d/dy_k = sum_j (d/dx_j) cof[j][k] / J.
  auto eulerian_grad = [&](const Field& f) {
    const Field d1 = diff(f, g, 1, 1);
    const Field d2 = diff(f, g, 2, 1);
    return std::array<Field, 2>{(d1 * kt.cof[0][0] + d2 * kt.cof[1][0]) * inv_j,
                                (d1 * kt.cof[0][1] + d2 * kt.cof[1][1]) * inv_j};
  };
  const auto grad_rho = eulerian_grad(w.values * inv_j);
  const auto grad_u1 = eulerian_grad(state.velocity[0]);
  const auto grad_u2 = eulerian_grad(state.velocity[1]);
  const std::array<std::array<Field, 2>, 2> du{grad_u1, grad_u2};  // du[i][k] = du^i/dy_k
  std::array<Field, 2> r;
  for (int i = 0; i < 2; ++i) {
    r[i] = g.zeros();
    for (int k = 0; k < 2; ++k) r[i] += grad_rho[k] * 0.5 * (du[k][i] + du[i][k]);
  }
  double worst = 0.0;
  for (int c = 0; c < g.n1; ++c) {
    Point bottom, top;
    for (int i = 0; i < 2; ++i) {
      bottom[i] = extrapolate_to_edge(r[i](c, 0), r[i](c, 1), r[i](c, 2));
      top[i] = extrapolate_to_edge(r[i](c, g.n2 - 1), r[i](c, g.n2 - 2), r[i](c, g.n2 - 3));
    }
    worst = std::max({worst, bottom.norm(), top.norm()});
  }
  return worst;
}

double stress_free_residual(const EulerianSnapshot& snapshot) {
  return stress_free_residual(snapshot.state, snapshot.weight);
}

MassReport mass_balance(const FlowMapState& state, const WeightField& w) {
  // Degree-5 seven-point triangle rule (barycentric coordinates, weights sum to 1).
  struct TriPoint {
    double a, b, c, weight;
  };
  constexpr double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
  constexpr double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
  constexpr std::array<TriPoint, 7> tri{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 0.225},
                                         {a1, b1, b1, w1},
                                         {b1, a1, b1, w1},
                                         {b1, b1, a1, w1},
                                         {a2, b2, b2, w2},
                                         {b2, a2, b2, w2},
                                         {b2, b2, a2, w2}}};
  // Five-point Gauss-Legendre on [0, 1].
  constexpr std::array<double, 5> gx{0.046910077030668, 0.230765344947158, 0.5,
                                     0.769234655052842, 0.953089922969332};
  constexpr std::array<double, 5> gw{0.118463442528095, 0.239314335249683, 0.284444444444444,
                                     0.239314335249683, 0.118463442528095};

  const Grid& g = w.grid;
  const FlowMapInterpolant map(state, g);
  MassReport rep;
  std::vector<Point> pts;
  std::vector<double> weights;
  for (int r = 0; r + 1 < map.rows(); ++r) {
    const double x2a = map.row(r), x2b = map.row(r + 1);
    for (int i = 0; i < g.n1; ++i) {
      const double x1a = i * g.h1, x1b = (i + 1) * g.h1;
      for (int p = 0; p < 5; ++p) {
        for (int q = 0; q < 5; ++q) {
          const double x1 = x1a + gx[p] * (x1b - x1a);
          const double x2 = x2a + gx[q] * (x2b - x2a);
          rep.lagrangian += gw[p] * gw[q] * (x1b - x1a) * (x2b - x2a) *
                            w.profile(x1 - std::floor(x1), x2);
        }
      }
      const Point v00 = map.map({x1a, x2a}), v10 = map.map({x1b, x2a});
      const Point v11 = map.map({x1b, x2b}), v01 = map.map({x1a, x2b});
      for (const auto& t : {std::array<Point, 3>{v00, v10, v11}, std::array<Point, 3>{v00, v11, v01}}) {
        const double area = 0.5 * std::abs(cross2(t[1] - t[0], t[2] - t[0]));
        for (const auto& tp : tri) {
          pts.push_back(tp.a * t[0] + tp.b * t[1] + tp.c * t[2]);
          weights.push_back(area * tp.weight);
        }
      }
    }
  }
  const std::vector<Preimage> pre = invert_flow_map(map, pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!pre[k].converged) {
      ++rep.failed_inversions;
      continue;
    }
    const Point& x = pre[k].x;
    const double x2 = std::clamp(x.y(), 0.0, 1.0);
    rep.eulerian += weights[k] * w.profile(x.x() - std::floor(x.x()), x2) /
                    map.gradient(x).determinant();
  }
  rep.relative_error = std::abs(rep.eulerian - rep.lagrangian) / std::abs(rep.lagrangian);
  return rep;
}

bool polyline_simple(const std::vector<Point>& curve) {
  const int n = static_cast<int>(curve.size()) - 1;
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    return cross2(b - a, c - a);
  };
  for (int a = 0; a < n; ++a) {
    for (int b = a + 2; b < n; ++b) {
      if (a == 0 && b == n - 1) continue;  // joined across the period
      const Point &p = curve[a], &q = curve[a + 1], &r = curve[b], &s = curve[b + 1];
      const double d1 = orient(p, q, r), d2 = orient(p, q, s);
      const double d3 = orient(r, s, p), d4 = orient(r, s, q);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return false;
    }
  }
  return true;
}

double polyline_curvature(const std::vector<Point>& curve) {
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < curve.size(); ++k) {
    const Point a = curve[k] - curve[k - 1];
    const Point b = curve[k + 1] - curve[k];
    const double angle = std::atan2(cross2(a, b), a.dot(b));
    worst = std::max(worst, std::abs(angle) / (0.5 * (a.norm() + b.norm())));
  }
  return worst;
}

}  // namespace svfb
