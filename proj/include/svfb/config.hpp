#pragma once

#include "svfb/grid.hpp"
#include "svfb/linearized.hpp"
#include "svfb/nonlinear.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace svfb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitialVelocity { zero, sinsin, constant };

/// Run configuration, read from an INI file with sections
/// [grid] [weight] [initial] [solver] [output] [run]. Unknown keys are errors.
struct SolverConfig {
  int n1 = 32;
  int n2 = 32;

  std::string profile = "sine";  ///< sine | parabolic | perturbed-sine | tabulated
  double epsilon = 0.1;
  std::string table;  ///< CSV path for the tabulated profile

  InitialVelocity u0 = InitialVelocity::sinsin;
  double amplitude = 0.05;
  double c1 = 0.0;
  double c2 = 0.0;

  int n_modes = 32;
  double T = 0.05;
  int steps = 200;  ///< T / dt
  double picard_tol = 1e-8;
  int max_iter = 50;
  int max_halvings = 6;
  Scheme scheme = Scheme::crank_nicolson;
  bool pressure = true;
  int truncation_order = 4;

  std::string out_dir = "out";
  int export_every = 50;
  bool write_modes = false;
  int query_n1 = 32;
  int query_n2 = 32;

  std::uint64_t seed = 0;
  bool timestamp = false;  ///< adds wall-clock time to the manifest

  std::string raw;  ///< file text, echoed verbatim in the manifest
  std::filesystem::path base_dir;  ///< relative paths resolve against this

  PicardSettings picard() const;
};

SolverConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
SolverConfig load_config(const std::filesystem::path& path);

WeightProfile make_profile(const SolverConfig& config);
VectorField initial_velocity(const SolverConfig& config, const Grid& grid);

std::string to_string(Scheme s);
std::string to_string(InitialVelocity u);

}  // namespace svfb
