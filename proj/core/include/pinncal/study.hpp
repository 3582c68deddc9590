#pragma once

// Study harnesses: repeated calibrations over a grid of cells.
//
// Every cell runs the same repeat seeds (seed, seed + 1, ...), so network
// initialization and point locations are shared across the cells of one
// repeat. A failed run is recorded in its cell and the sweep continues.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinncal/calibration.hpp"
#include "pinncal/config.hpp"
#include "pinncal/metrics.hpp"

namespace pinncal {

struct StudyCell {
  std::string label;
  nlohmann::json coords;
  ExperimentConfig config;
};

/// Expands the grid of `cfg.study` (the kind must be set).
std::vector<StudyCell> study_cells(const ExperimentConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  std::optional<CalibrationResult> result;
  std::string error;
};

struct CellSummary {
  std::string label;
  nlohmann::json coords;
  int runs = 0;
  int failures = 0;
  metrics::GroupStats E;
  /// Empty (n = 0) for the rod.
  metrics::GroupStats nu;
  std::vector<double> mean_rl2;
  double mean_wall_time_s = 0.0;
};

/// Statistics over the successful runs of one cell.
CellSummary summarize_cell(const std::string& label, const nlohmann::json& coords,
                           const std::vector<CalibrationResult>& results, int failures);

struct StudyReport {
  std::string study;
  std::string config_name;
  std::string config_hash;
  std::vector<CellSummary> cells;
  std::vector<std::vector<RunRecord>> runs;
};

struct StudyOptions {
  /// Per-run artifacts and the summary go here when set.
  std::optional<std::filesystem::path> output_dir;
  int jobs = 1;
  std::function<void(const std::string&)> log;
};

StudyReport run_study(const ExperimentConfig& cfg, const StudyOptions& options);

/// One row per cell: label, coordinates, counts, mean RE, MARE, SEM, max ARE.
std::string study_csv(const std::vector<CellSummary>& cells);
nlohmann::json to_json(const CellSummary& c);
nlohmann::json to_json(const StudyReport& r);

}  // namespace pinncal
