#include "svfb/calculus.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace svfb {

namespace {

constexpr double kPi = std::numbers::pi;

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

Stencil make_stencil(const std::vector<int>& offsets, int order, double h) {
  std::vector<double> nodes(offsets.begin(), offsets.end());
  Stencil s{offsets, fd_weights(nodes, 0.0, order)};
  const double scale = std::pow(h, order);
  for (double& c : s.weights) c /= scale;
  return s;
}

int centered_half_width(int order) { return order <= 2 ? 1 : 2; }

// Stencil for row j of an axis with n non-periodic nodes.
Stencil edge_aware_stencil(int j, int n, int order, double h) {
  const int hw = centered_half_width(order);
  std::vector<int> offsets;
  if (j - hw >= 0 && j + hw <= n - 1) {
    for (int o = -hw; o <= hw; ++o) offsets.push_back(o);
  } else {
    const int width = order + 2;
    if (width > n) {
      throw std::invalid_argument("diff: grid too coarse for derivative order " +
                                  std::to_string(order));
    }
    const int start = std::clamp(j - width / 2, 0, n - width);
    for (int k = 0; k < width; ++k) offsets.push_back(start + k - j);
  }
  return make_stencil(offsets, order, h);
}

double weighted_norm2(const Field& f, const WeightField& w, int power) {
  return weighted_inner(f, f, w, power);
}

}  // namespace

double weighted_inner(const Field& f, const Field& g, const WeightField& w, int power) {
  if (power < 0 || power > 8) {
    throw std::invalid_argument("weighted_inner: power must be in [0, 8]");
  }
  const Grid& grid = w.grid;
  if (f.rows() != grid.n1 || f.cols() != grid.n2 || g.rows() != grid.n1 ||
      g.cols() != grid.n2) {
    throw std::invalid_argument("weighted_inner: field shape does not match the grid");
  }
  const Field weight = power == 0 ? grid.constant(1.0) : Field(w.values.pow(power));
  return (weight * f * g).sum() * grid.h1 * grid.h2;
}

double weighted_inner(const VectorField& f, const VectorField& g, const WeightField& w,
                      int power) {
  return weighted_inner(f[0], g[0], w, power) + weighted_inner(f[1], g[1], w, power);
}

Field diff(const Field& f, const Grid& grid, int axis, int order) {
  if (order < 1 || order > 4) throw std::invalid_argument("diff: order must be in 1..4");
  if (axis != 1 && axis != 2) throw std::invalid_argument("diff: axis must be 1 or 2");
  const int n1 = grid.n1;
  const int n2 = grid.n2;
  Field out = Field::Zero(n1, n2);
  if (axis == 1) {
    const int hw = centered_half_width(order);
    std::vector<int> offsets;
    for (int o = -hw; o <= hw; ++o) offsets.push_back(o);
    const Stencil s = make_stencil(offsets, order, grid.h1);
    for (std::size_t k = 0; k < s.offsets.size(); ++k) {
      const int o = ((s.offsets[k] % n1) + n1) % n1;
      // out(i, :) += w * f(i + o, :)
      out.topRows(n1 - o) += s.weights[k] * f.bottomRows(n1 - o);
      if (o > 0) out.bottomRows(o) += s.weights[k] * f.topRows(o);
    }
    return out;
  }
  for (int j = 0; j < n2; ++j) {
    const Stencil s = edge_aware_stencil(j, n2, order, grid.h2);
    for (std::size_t k = 0; k < s.offsets.size(); ++k) {
      out.col(j) += s.weights[k] * f.col(j + s.offsets[k]);
    }
  }
  return out;
}

Field diff_mixed(const Field& f, const Grid& grid, int l1, int l2) {
  Field out = f;
  if (l2 > 0) out = diff(out, grid, 2, l2);
  if (l1 > 0) out = diff(out, grid, 1, l1);
  return out;
}

InequalityReport check_hardy_embedding(const Field& g, const WeightField& w, int alpha) {
  InequalityReport r;
  r.name = "hardy_alpha" + std::to_string(alpha);
  r.n1 = w.grid.n1;
  r.n2 = w.grid.n2;
  const Field g1 = diff(g, w.grid, 1, 1);
  const Field g2 = diff(g, w.grid, 2, 1);
  r.lhs = weighted_norm2(g, w, alpha);
  r.rhs = weighted_norm2(g, w, alpha + 2) + weighted_norm2(g1, w, alpha + 2) +
          weighted_norm2(g2, w, alpha + 2);
  if (r.rhs > 0.0) {
    r.constant = r.lhs / r.rhs;
  } else {
    r.degenerate = true;
    r.constant = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

InequalityReport check_interpolation(const Field& g, const WeightField& w) {
  InequalityReport r;
  r.name = "interpolation";
  r.n1 = w.grid.n1;
  r.n2 = w.grid.n2;
  const Field g1 = diff(g, w.grid, 1, 1);
  const Field g2 = diff(g, w.grid, 2, 1);
  const double l2 = std::sqrt(weighted_norm2(g, w, 0));
  const double l2w = std::sqrt(weighted_norm2(g, w, 1));
  const double h1w = std::sqrt(l2w * l2w + weighted_norm2(g1, w, 1) + weighted_norm2(g2, w, 1));
  r.lhs = l2;
  r.rhs = std::sqrt(l2w) * std::sqrt(h1w);
  if (r.rhs > 0.0) {
    r.constant = r.lhs / r.rhs;
  } else {
    r.degenerate = true;
    r.constant = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

double tangent_ratio(const WeightField& w, int l) {
  if (l < 1 || l > 4) throw std::invalid_argument("tangent_ratio: l must be in 1..4");
  const Field d = diff(w.values, w.grid, 1, l);
  return (d.abs() / w.values).maxCoeff();
}

double surrogate_h_half(const Field& g, const WeightField& w) {
  const Field g1 = diff(g, w.grid, 1, 1);
  const Field g2 = diff(g, w.grid, 2, 1);
  return std::sqrt(weighted_norm2(g, w, 1) + weighted_norm2(g1, w, 1) + weighted_norm2(g2, w, 1));
}

double SmoothSample::operator()(double x1, double x2) const {
  // Legendre polynomials in s = 2 x2 - 1 by the three-term recurrence.
  const double s = 2.0 * x2 - 1.0;
  std::vector<double> p(n_poly);
  if (n_poly > 0) p[0] = 1.0;
  if (n_poly > 1) p[1] = s;
  for (int q = 2; q < n_poly; ++q) p[q] = ((2 * q - 1) * s * p[q - 1] - (q - 1) * p[q - 2]) / q;
  double value = 0.0;
  for (int k = 0; k < n_fourier; ++k) {
    const double c = std::cos(2.0 * kPi * k * x1);
    const double sn = std::sin(2.0 * kPi * k * x1);
    for (int q = 0; q < n_poly; ++q) {
      value += (cos_coef[k * n_poly + q] * c + sin_coef[k * n_poly + q] * sn) * p[q];
    }
  }
  return value;
}

std::vector<SmoothSample> random_samples(std::uint64_t seed, int count, int n_fourier,
                                         int n_poly) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SmoothSample> out;
  out.reserve(count);
  for (int c = 0; c < count; ++c) {
    SmoothSample s;
    s.n_fourier = n_fourier;
    s.n_poly = n_poly;
    s.seed = seed;
    s.cos_coef.resize(n_fourier * n_poly);
    s.sin_coef.resize(n_fourier * n_poly);
    for (int k = 0; k < n_fourier; ++k) {
      for (int q = 0; q < n_poly; ++q) {
        const double decay = 1.0 / (1.0 + k + q);
        s.cos_coef[k * n_poly + q] = decay * normal(rng);
        s.sin_coef[k * n_poly + q] = k == 0 ? 0.0 : decay * normal(rng);
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

template <typename Check>
SampleSuiteResult run_suite(const WeightField& w, const std::vector<SmoothSample>& samples,
                            Check check) {
  SampleSuiteResult res;
  res.max_constant = -std::numeric_limits<double>::infinity();
  res.min_constant = std::numeric_limits<double>::infinity();
  int index = 0;
  for (const auto& s : samples) {
    InequalityReport r = check(w.grid.sample(std::cref(s)));
    r.sample = "random#" + std::to_string(index++);
    r.seed = s.seed;
    if (!r.degenerate) {
      res.max_constant = std::max(res.max_constant, r.constant);
      res.min_constant = std::min(res.min_constant, r.constant);
    }
    res.reports.push_back(std::move(r));
  }
  return res;
}

}  // namespace

SampleSuiteResult hardy_suite(const WeightField& w, const std::vector<SmoothSample>& samples,
                              int alpha) {
  return run_suite(w, samples,
                   [&](const Field& g) { return check_hardy_embedding(g, w, alpha); });
}

SampleSuiteResult interpolation_suite(const WeightField& w,
                                      const std::vector<SmoothSample>& samples) {
  return run_suite(w, samples, [&](const Field& g) { return check_interpolation(g, w); });
}

std::string to_csv_row(const InequalityReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%d,%d,%llu", r.name.c_str(), r.lhs, r.rhs,
                r.constant, r.n1, r.n2, static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace svfb
