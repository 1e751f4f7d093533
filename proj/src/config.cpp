#include "svfb/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace svfb {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"grid", {"n1", "n2"}},
      {"weight", {"profile", "epsilon", "table"}},
      {"initial", {"u0", "amplitude", "c1", "c2"}},
      {"solver",
       {"n_modes", "T", "dt", "picard_tol", "max_iter", "max_halvings", "scheme", "pressure",
        "truncation_order"}},
      {"output", {"dir", "export_every", "write_modes", "query_n1", "query_n2"}},
      {"run", {"seed", "timestamp"}},
  };
  return keys;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '/'));
  if (!node) return fallback;
  const std::string text = node->get_value<std::string>();
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, bool>) {
    const std::string v = lower(text);
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + text + "'");
  } else {
    std::istringstream in(text);
    T value{};
    in >> value;
    if (in.fail() || !(in >> std::ws).eof()) {
      throw ConfigError("config: '" + key + "' has malformed value '" + text + "'");
    }
    return value;
  }
}

template <typename T>
void require_range(const std::string& key, T value, T lo, T hi) {
  if (!(value >= lo && value <= hi)) {
    std::ostringstream msg;
    msg << "config: '" << key << "' = " << value << " outside [" << lo << ", " << hi << "]";
    throw ConfigError(msg.str());
  }
}

}  // namespace

PicardSettings SolverConfig::picard() const {
  PicardSettings s;
  s.T = T;
  s.steps = steps;
  s.tolerance = picard_tol;
  s.max_iterations = max_iter;
  s.scheme = scheme;
  s.pressure = pressure;
  s.max_halvings = max_halvings;
  return s;
}

SolverConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw ConfigError("config: key '" + section + "' outside any section");
    }
    auto it = known_keys().find(section);
    if (it == known_keys().end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  SolverConfig c;
  c.raw = text;
  c.base_dir = base_dir;
  c.n1 = get(tree, "grid/n1", c.n1);
  c.n2 = get(tree, "grid/n2", c.n2);
  require_range("grid.n1", c.n1, 8, 1024);
  require_range("grid.n2", c.n2, 8, 1024);

  c.profile = lower(get(tree, "weight/profile", c.profile));
  c.epsilon = get(tree, "weight/epsilon", c.epsilon);
  c.table = get(tree, "weight/table", c.table);
  if (c.profile != "sine" && c.profile != "parabolic" && c.profile != "perturbed-sine" &&
      c.profile != "tabulated") {
    throw ConfigError("config: unknown weight profile '" + c.profile + "'");
  }
  if (c.profile == "perturbed-sine") require_range("weight.epsilon", std::abs(c.epsilon), 0.0, 0.4999);
  if (c.profile == "tabulated" && c.table.empty()) {
    throw ConfigError("config: tabulated profile needs weight.table");
  }

  const std::string u0 = lower(get<std::string>(tree, "initial/u0", "sinsin"));
  if (u0 == "zero") {
    c.u0 = InitialVelocity::zero;
  } else if (u0 == "sinsin") {
    c.u0 = InitialVelocity::sinsin;
  } else if (u0 == "constant") {
    c.u0 = InitialVelocity::constant;
  } else {
    throw ConfigError("config: unknown initial velocity '" + u0 + "'");
  }
  c.amplitude = get(tree, "initial/amplitude", c.amplitude);
  c.c1 = get(tree, "initial/c1", c.c1);
  c.c2 = get(tree, "initial/c2", c.c2);
  require_range("initial.amplitude", std::abs(c.amplitude), 0.0, 10.0);

  c.n_modes = get(tree, "solver/n_modes", c.n_modes);
  c.T = get(tree, "solver/T", c.T);
  require_range("solver.T", c.T, 1e-12, 10.0);
  const double dt = get(tree, "solver/dt", c.T / c.steps);
  require_range("solver.dt", dt, 1e-14, c.T);
  const double steps = c.T / dt;
  c.steps = static_cast<int>(std::llround(steps));
  if (std::abs(steps - c.steps) > 1e-9 * steps) {
    throw ConfigError("config: solver.T must be an integer multiple of solver.dt");
  }
  require_range("solver.steps (T/dt)", c.steps, 1, 100000);
  c.picard_tol = get(tree, "solver/picard_tol", c.picard_tol);
  require_range("solver.picard_tol", c.picard_tol, 0.0, 1.0);
  c.max_iter = get(tree, "solver/max_iter", c.max_iter);
  require_range("solver.max_iter", c.max_iter, 1, 1000);
  c.max_halvings = get(tree, "solver/max_halvings", c.max_halvings);
  require_range("solver.max_halvings", c.max_halvings, 0, 20);
  require_range("solver.n_modes", c.n_modes, 1, c.n1 * c.n2);
  const std::string scheme = lower(get<std::string>(tree, "solver/scheme", "crank-nicolson"));
  if (scheme == "crank-nicolson") {
    c.scheme = Scheme::crank_nicolson;
  } else if (scheme == "implicit-euler") {
    c.scheme = Scheme::implicit_euler;
  } else {
    throw ConfigError("config: unknown scheme '" + scheme + "'");
  }
  c.pressure = get(tree, "solver/pressure", c.pressure);
  c.truncation_order = get(tree, "solver/truncation_order", c.truncation_order);
  require_range("solver.truncation_order", c.truncation_order, 2, 4);

  c.out_dir = get(tree, "output/dir", c.out_dir);
  c.export_every = get(tree, "output/export_every", c.export_every);
  require_range("output.export_every", c.export_every, 1, 1000000);
  c.write_modes = get(tree, "output/write_modes", c.write_modes);
  c.query_n1 = get(tree, "output/query_n1", c.query_n1);
  c.query_n2 = get(tree, "output/query_n2", c.query_n2);
  require_range("output.query_n1", c.query_n1, 1, 4096);
  require_range("output.query_n2", c.query_n2, 1, 4096);

  c.seed = get(tree, "run/seed", c.seed);
  c.timestamp = get(tree, "run/timestamp", c.timestamp);
  return c;
}

SolverConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

WeightProfile make_profile(const SolverConfig& c) {
  if (c.profile == "sine") return WeightProfile::sine();
  if (c.profile == "parabolic") return WeightProfile::parabolic();
  if (c.profile == "perturbed-sine") return WeightProfile::perturbed_sine(c.epsilon);
  std::filesystem::path table = c.table;
  if (table.is_relative() && !c.base_dir.empty()) table = c.base_dir / table;
  try {
    return WeightProfile::tabulated_csv(table.string());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

VectorField initial_velocity(const SolverConfig& c, const Grid& grid) {
  constexpr double pi = std::numbers::pi;
  switch (c.u0) {
    case InitialVelocity::zero:
      return {grid.zeros(), grid.zeros()};
    case InitialVelocity::constant:
      return {grid.constant(c.c1), grid.constant(c.c2)};
    case InitialVelocity::sinsin:
      break;
  }
  const double a = c.amplitude;
  return {grid.sample([a](double x1, double x2) {
            return a * std::sin(2.0 * pi * x1) * std::sin(pi * x2);
          }),
          grid.zeros()};
}

std::string to_string(Scheme s) {
  return s == Scheme::implicit_euler ? "implicit-euler" : "crank-nicolson";
}

std::string to_string(InitialVelocity u) {
  switch (u) {
    case InitialVelocity::zero:
      return "zero";
    case InitialVelocity::constant:
      return "constant";
    case InitialVelocity::sinsin:
      break;
  }
  return "sinsin";
}

}  // namespace svfb
