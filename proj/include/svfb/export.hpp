#pragma once

#include "svfb/config.hpp"
#include "svfb/eulerian.hpp"
#include "svfb/nonlinear.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace svfb {

/// Everything a run leaves behind. Pointers may be null for a failed or
/// empty run, in which case only the manifest is written.
struct RunArtifacts {
  const SolverConfig* config = nullptr;
  const WeightField* weight = nullptr;
  const Solution* solution = nullptr;
  const PicardTrace* trace = nullptr;
  std::vector<EnergyReport> energy;  ///< one per solution time
  std::vector<std::size_t> export_indices;
  std::vector<EulerianSnapshot> snapshots;  ///< aligned with export_indices
  std::vector<std::pair<std::string, std::string>> summary;
  std::vector<std::pair<std::string, bool>> checks;
};

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// 0, every, 2 every, ..., always including the last index.
std::vector<std::size_t> export_schedule(std::size_t count, int every);

/// Writes energy.csv, picard.csv, state_<k>.csv, eulerian_<k>.csv,
/// boundary_<k>.csv and manifest.txt; returns the written paths.
/// Throws std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> export_run(const RunArtifacts& run,
                                              const std::filesystem::path& dir);

/// Writes rows to `path` with a header line (shared by the CLI reports).
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows);

}  // namespace svfb
