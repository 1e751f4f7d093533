#pragma once

#include "svfb/config.hpp"
#include "svfb/eigenbasis.hpp"
#include "svfb/eulerian.hpp"
#include "svfb/export.hpp"
#include "svfb/nonlinear.hpp"

#include <iosfwd>
#include <vector>

namespace svfb {

/// One full `run`: weight, basis, Picard solve and all diagnostics.
struct RunOutcome {
  RunOutcome(SolverConfig c, WeightField w, ValidationReport v)
      : config(std::move(c)), weight(std::move(w)), validation(std::move(v)) {}

  SolverConfig config;
  WeightField weight;
  ValidationReport validation;
  SpectralBasis basis;
  BasisReport basis_report;
  Solution solution;
  PicardTrace trace;
  std::vector<EnergyReport> energy;
  std::vector<std::size_t> export_indices;
  std::vector<EulerianSnapshot> snapshots;
  std::vector<MassReport> mass;
  std::vector<double> stress_free;  ///< per export index
  bool bounds_ok = false;
  bool energy_ok = false;
  bool mass_ok = false;
};

/// Throws ConfigError when the configured weight fails validation.
RunOutcome run_pipeline(const SolverConfig& config);

/// Export view of an outcome (the outcome must outlive it).
RunArtifacts artifacts(const RunOutcome& outcome);

/// `svfb run|eigen|check <config> [--out DIR] [--quiet]`.
/// Exit codes: 0 success, 1 convergence or validation failure, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace svfb
