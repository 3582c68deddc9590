#pragma once

// Merges persisted run results into plot-ready tables.

#include <filesystem>
#include <string>
#include <vector>

#include "pinncal/calibration.hpp"
#include "pinncal/study.hpp"

namespace pinncal {

struct LoadedRun {
  std::filesystem::path path;
  CalibrationResult result;
};

struct ResultScan {
  std::vector<LoadedRun> runs;
  /// Unreadable or malformed result files with the reason.
  std::vector<std::string> problems;
};

/// Recursively collects run results (JSON files carrying a schema_version
/// and a config_hash; study summaries and checkpoints are skipped).
ResultScan scan_results(const std::filesystem::path& dir);

struct ReportSummary {
  int runs = 0;
  int cells = 0;
  std::vector<std::string> problems;
  std::vector<std::filesystem::path> files;
};

/// Writes into `out_dir`: runs.csv (one row per run), cells.csv (one row per
/// study cell or per config), loss_history.csv (every run's history with a
/// run column) and problems.txt when some files could not be used.
/// Throws DataError when no result is found, or when results of different
/// configs are mixed and `force` is false.
ReportSummary write_report(const std::filesystem::path& results_dir, const std::filesystem::path& out_dir,
                           bool force);

}  // namespace pinncal
