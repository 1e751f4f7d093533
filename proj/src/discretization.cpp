#include "svfb/discretization.hpp"

#include <cmath>
#include <vector>

namespace svfb {

namespace {

using Triplet = Eigen::Triplet<double>;

}  // namespace

std::shared_ptr<const Discretization> build_discretization(const WeightField& w) {
  const Grid& g = w.grid;
  const int n1 = g.n1;
  const int n2 = g.n2;
  const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

  // x2 breakpoints: 0, node rows, 1. Interval m spans [y[m], y[m+1]].
  std::vector<double> y(n2 + 2);
  y[0] = 0.0;
  for (int j = 0; j < n2; ++j) y[j + 1] = g.x2(j);
  y[n2 + 1] = 1.0;

  const int cells = n1 * (n2 + 1);
  const int nq = 4 * cells;
  auto d = std::make_shared<Discretization>();
  d->grid = g;
  d->weight.resize(nq);
  d->x1.resize(nq);
  d->x2.resize(nq);
  d->rho.resize(nq);

  std::vector<Triplet> tv, t1, t2;
  tv.reserve(4 * nq);
  t1.reserve(4 * nq);
  t2.reserve(4 * nq);

  int q = 0;
  for (int m = 0; m <= n2; ++m) {
    const double y0 = y[m];
    const double hy = y[m + 1] - y[m];
    // Node rows at the lower/upper edge of the interval; strips reuse one row.
    const int row_lo = m == 0 ? 0 : m - 1;
    const int row_hi = m == n2 ? n2 - 1 : m;
    const bool strip = (m == 0 || m == n2);
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1;
      const int nodes[4] = {g.index(i, row_lo), g.index(ip, row_lo), g.index(i, row_hi),
                            g.index(ip, row_hi)};
      for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a, ++q) {
          const double s = gp[a];
          const double r = gp[b];
          d->weight[q] = 0.25 * g.h1 * hy;
          d->x1[q] = g.x1(i) + s * g.h1;
          d->x2[q] = y0 + r * hy;
          d->rho[q] = w.profile(d->x1[q], d->x2[q]);
          double phi[4], d1[4], d2[4];
          if (strip) {
            // Constant in x2 across the half-cell.
            phi[0] = 0.5 * (1.0 - s);
            phi[1] = 0.5 * s;
            phi[2] = 0.5 * (1.0 - s);
            phi[3] = 0.5 * s;
            d1[0] = -0.5 / g.h1;
            d1[1] = 0.5 / g.h1;
            d1[2] = -0.5 / g.h1;
            d1[3] = 0.5 / g.h1;
            d2[0] = d2[1] = d2[2] = d2[3] = 0.0;
          } else {
            phi[0] = (1.0 - s) * (1.0 - r);
            phi[1] = s * (1.0 - r);
            phi[2] = (1.0 - s) * r;
            phi[3] = s * r;
            d1[0] = -(1.0 - r) / g.h1;
            d1[1] = (1.0 - r) / g.h1;
            d1[2] = -r / g.h1;
            d1[3] = r / g.h1;
            d2[0] = -(1.0 - s) / hy;
            d2[1] = -s / hy;
            d2[2] = (1.0 - s) / hy;
            d2[3] = s / hy;
          }
          for (int k = 0; k < 4; ++k) {
            tv.emplace_back(q, nodes[k], phi[k]);
            t1.emplace_back(q, nodes[k], d1[k]);
            if (d2[k] != 0.0) t2.emplace_back(q, nodes[k], d2[k]);
          }
        }
      }
    }
  }

  const int dofs = g.size();
  d->value.resize(nq, dofs);
  d->value.setFromTriplets(tv.begin(), tv.end());
  d->gradient[0].resize(nq, dofs);
  d->gradient[0].setFromTriplets(t1.begin(), t1.end());
  d->gradient[1].resize(nq, dofs);
  d->gradient[1].setFromTriplets(t2.begin(), t2.end());
  return d;
}

Eigen::VectorXd Discretization::at_quadrature(const Field& f) const {
  return value * flatten(f);
}

}  // namespace svfb
