#include "svfb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace svfb {

namespace {

constexpr double kPi = std::numbers::pi;

// Dense sampling resolution used for the comparability constants.
constexpr int kSampleX2 = 2000;
constexpr int kSampleX1 = 64;

double interpolate_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k;
  if (it == xs.begin()) {
    k = 0;
  } else if (it == xs.end()) {
    k = xs.size() - 2;
  } else {
    k = static_cast<std::size_t>(it - xs.begin()) - 1;
  }
  const double t = (x - xs[k]) / (xs[k + 1] - xs[k]);
  return ys[k] + t * (ys[k + 1] - ys[k]);
}

}  // namespace

Field Grid::sample(const std::function<double(double, double)>& f) const {
  Field out(n1, n2);
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) out(i, j) = f(x1(i), x2(j));
  }
  return out;
}

Field Grid::x1_field() const {
  return sample([](double a, double) { return a; });
}

Field Grid::x2_field() const {
  return sample([](double, double b) { return b; });
}

Grid build_grid(int n1, int n2) {
  if (n1 < 4 || n2 < 4) {
    throw std::invalid_argument("build_grid: n1 and n2 must be at least 4 (got " +
                                std::to_string(n1) + ", " + std::to_string(n2) + ")");
  }
  Grid g;
  g.n1 = n1;
  g.n2 = n2;
  g.h1 = 1.0 / n1;
  g.h2 = 1.0 / n2;
  return g;
}

WeightProfile WeightProfile::sine() {
  return {ProfileKind::sine, "sine", [](double, double x2) { return std::sin(kPi * x2); }, 0.0,
          true};
}

WeightProfile WeightProfile::parabolic() {
  return {ProfileKind::parabolic, "parabolic", [](double, double x2) { return x2 * (1.0 - x2); },
          0.0, true};
}

WeightProfile WeightProfile::perturbed_sine(double eps) {
  if (!(std::abs(eps) < 0.5)) {
    throw std::invalid_argument("perturbed-sine profile requires |epsilon| < 1/2");
  }
  return {ProfileKind::perturbed_sine, "perturbed-sine",
          [eps](double x1, double x2) {
            return (1.0 + eps * std::sin(2.0 * kPi * x1)) * std::sin(kPi * x2);
          },
          eps, eps == 0.0};
}

WeightProfile WeightProfile::tabulated(std::vector<double> x2, std::vector<double> rho,
                                       std::vector<double> modulation) {
  if (x2.size() < 2 || x2.size() != rho.size()) {
    throw std::invalid_argument("tabulated profile needs at least two (x2, rho0) rows");
  }
  if (!modulation.empty() && modulation.size() != x2.size()) {
    throw std::invalid_argument("tabulated profile: modulation column length mismatch");
  }
  for (std::size_t k = 1; k < x2.size(); ++k) {
    if (!(x2[k] > x2[k - 1])) {
      throw std::invalid_argument("tabulated profile: x2 column must be strictly increasing");
    }
  }
  for (std::size_t k = 0; k < x2.size(); ++k) {
    if (x2[k] > 0.0 && x2[k] < 1.0 && !(rho[k] > 0.0)) {
      throw std::invalid_argument("tabulated profile: nonpositive interior value at x2 = " +
                                  std::to_string(x2[k]));
    }
  }
  const bool flat = modulation.empty() ||
                    std::all_of(modulation.begin(), modulation.end(),
                                [](double m) { return m == 0.0; });
  auto f = [x2, rho, modulation](double a, double b) {
    double value = interpolate_table(x2, rho, b);
    if (!modulation.empty()) {
      value *= 1.0 + interpolate_table(x2, modulation, b) * std::sin(2.0 * kPi * a);
    }
    return value;
  };
  return {ProfileKind::tabulated, "tabulated", std::move(f), 0.0, flat};
}

WeightProfile WeightProfile::tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open tabulated profile: " + path);
  std::vector<double> xs, ys, ms;
  std::string line;
  int columns = -1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> vals;
    double v;
    while (row >> v) vals.push_back(v);
    if (vals.empty()) {
      if (xs.empty()) continue;  // header
      throw std::invalid_argument("tabulated profile: malformed row '" + line + "'");
    }
    if (columns < 0) columns = static_cast<int>(vals.size());
    if (static_cast<int>(vals.size()) != columns || columns < 2 || columns > 3) {
      throw std::invalid_argument("tabulated profile: expected 2 or 3 columns");
    }
    xs.push_back(vals[0]);
    ys.push_back(vals[1]);
    if (columns == 3) ms.push_back(vals[2]);
  }
  return tabulated(std::move(xs), std::move(ys), std::move(ms));
}

WeightProfile WeightProfile::custom(std::string name, std::function<double(double, double)> f,
                                    bool x1_independent) {
  return {ProfileKind::custom, std::move(name), std::move(f), 0.0, x1_independent};
}

WeightField build_weight(const WeightProfile& profile, const Grid& grid) {
  WeightField w{grid, profile, grid.sample(std::cref(profile)), 0.0, 0.0};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const int n1s = profile.x1_independent() ? 1 : kSampleX1;
  for (int a = 0; a < n1s; ++a) {
    const double x1 = (a + 0.5) / n1s;
    for (int b = 0; b < kSampleX2; ++b) {
      const double x2 = (b + 0.5) / kSampleX2;
      const double r = profile(x1, x2) / boundary_distance(x2);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  w.c1 = lo;
  w.c2 = hi;
  return w;
}

ValidationReport validate_physical_vacuum(const WeightField& w) {
  const Grid& g = w.grid;
  ValidationReport rep;
  rep.ratio_min = w.c1;
  rep.ratio_max = w.c2;

  for (int j = 0; j < g.n2; ++j) {
    for (int i = 0; i < g.n1; ++i) {
      if (!(w.values(i, j) > 0.0)) rep.offending_nodes.emplace_back(i, j);
    }
  }
  if (!rep.offending_nodes.empty()) rep.messages.push_back("rho0 not positive at every node");

  const double scale = w.values.abs().maxCoeff();
  rep.boundary_tolerance = 3.0 * g.h2 * g.h2 * std::max(scale, 1e-300);
  if (g.n2 >= 3) {
    for (int i = 0; i < g.n1; ++i) {
      const double bottom = extrapolate_to_edge(w.values(i, 0), w.values(i, 1), w.values(i, 2));
      const double top =
          extrapolate_to_edge(w.values(i, g.n2 - 1), w.values(i, g.n2 - 2), w.values(i, g.n2 - 3));
      rep.boundary_residual = std::max({rep.boundary_residual, std::abs(bottom), std::abs(top)});
    }
  }
  if (rep.boundary_residual > rep.boundary_tolerance) {
    rep.messages.push_back("rho0 does not vanish on the boundary");
  }

  // Local vanishing exponent from rho0(delta) / rho0(delta / 2).
  constexpr double delta = 1e-3;
  rep.vanishing_order_min = std::numeric_limits<double>::infinity();
  rep.vanishing_order_max = -rep.vanishing_order_min;
  const int n1s = w.profile.x1_independent() ? 1 : kSampleX1;
  bool order_ok = true;
  for (int a = 0; a < n1s; ++a) {
    const double x1 = (a + 0.5) / n1s;
    for (const auto& [near, half] : {std::pair{delta, 0.5 * delta},
                                    std::pair{1.0 - delta, 1.0 - 0.5 * delta}}) {
      const double r_far = w.profile(x1, near);
      const double r_near = w.profile(x1, half);
      if (!(r_far > 0.0) || !(r_near > 0.0)) {
        order_ok = false;
        continue;
      }
      const double p = std::log2(r_far / r_near);
      rep.vanishing_order_min = std::min(rep.vanishing_order_min, p);
      rep.vanishing_order_max = std::max(rep.vanishing_order_max, p);
    }
  }
  if (!order_ok || rep.vanishing_order_min < 0.9 || rep.vanishing_order_max > 1.1) {
    rep.messages.push_back("rho0 is not comparable to the boundary distance");
    order_ok = false;
    for (int i = 0; i < g.n1; ++i) {
      rep.offending_nodes.emplace_back(i, 0);
      rep.offending_nodes.emplace_back(i, g.n2 - 1);
    }
  }
  const bool ratios_ok = std::isfinite(rep.ratio_min) && std::isfinite(rep.ratio_max) &&
                         rep.ratio_min > 0.0;
  if (!ratios_ok) rep.messages.push_back("comparability constants not finite and positive");

  rep.pass = rep.offending_nodes.empty() && rep.boundary_residual <= rep.boundary_tolerance &&
             order_ok && ratios_ok;
  return rep;
}

double tabulated_smoothness(const WeightProfile& profile, const Grid& grid) {
  // 4th divided differences of rho0 along x2 at node spacing.
  double worst = 0.0;
  const int n1s = profile.x1_independent() ? 1 : grid.n1;
  for (int i = 0; i < n1s; ++i) {
    for (int j = 0; j + 4 < grid.n2; ++j) {
      double q = 0.0;
      constexpr std::array<double, 5> c{1.0, -4.0, 6.0, -4.0, 1.0};
      for (int k = 0; k < 5; ++k) q += c[k] * profile(grid.x1(i), grid.x2(j + k));
      worst = std::max(worst, std::abs(q) / std::pow(grid.h2, 4));
    }
  }
  return worst;
}

}  // namespace svfb
