#pragma once

// One calibration run: data for a seed, networks, loss, BFGS, identified
// parameters and their persisted artifacts.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pinncal/checkpoint.hpp"
#include "pinncal/config.hpp"
#include "pinncal/datagen/csv_io.hpp"
#include "pinncal/datagen/fem.hpp"
#include "pinncal/loss.hpp"

namespace pinncal {

inline constexpr int kResultSchemaVersion = 1;

/// Seed-independent data of an experiment (the FE field is solved once).
struct CaseData {
  CaseKind kind = CaseKind::kRodAnalytical;
  datagen::RodCase rod;
  std::optional<datagen::Rod1DData> measured;
  datagen::PlateCase plate;
  std::optional<datagen::FemSolution> fem;
};

CaseData prepare_case(const ExperimentConfig& cfg);

struct RunData {
  TrainingSet set;
  Eigen::MatrixXd validation_points;
  Eigen::MatrixXd validation_values;
};

/// Sampling and noise for one seed.
RunData build_run_data(const ExperimentConfig& cfg, const CaseData& data, std::uint64_t seed);

struct CalibrationResult {
  int schema_version = kResultSchemaVersion;
  std::string config_name;
  std::string config_hash;
  std::string case_name;
  std::string mode;
  std::uint64_t seed = 0;

  std::vector<std::string> parameter_names;
  std::vector<double> estimates;
  std::vector<double> correction_factors;
  std::vector<double> identified;

  double E = 0.0;
  /// NaN (null in JSON) for the rod.
  double nu = 0.0;
  double K = 0.0;
  double G = 0.0;
  double re_E = 0.0;
  double re_nu = 0.0;
  std::vector<double> rl2;

  LossBreakdown final_loss;
  int iterations = 0;
  int evaluations = 0;
  std::string status;
  double wall_time_s = 0.0;
  std::string history_path;
  std::string checkpoint_path;

  /// Study cell coordinates; empty for a single calibration.
  nlohmann::json cell = nlohmann::json::object();
};

nlohmann::json to_json(const CalibrationResult& r);
/// Throws DataError on a missing field or an unsupported schema version.
CalibrationResult calibration_result_from_json(const nlohmann::json& j);

struct RunOutcome {
  CalibrationResult result;
  std::vector<HistoryRow> history;
  Checkpoint checkpoint;
};

using ProgressCallback = std::function<void(const HistoryRow&)>;

RunOutcome run_calibration(const ExperimentConfig& cfg, const CaseData& data, std::uint64_t seed,
                           const ProgressCallback& progress = {});

/// Writes <stem>.json, <stem>_history.csv and <stem>_checkpoint.json into
/// `dir` (each atomically) and records the artifact names in the result.
void write_run(const std::filesystem::path& dir, const std::string& stem, RunOutcome& outcome);

}  // namespace pinncal
