#pragma once

// Experiment configuration: JSON in, validated plain struct out.
//
// A config file holds the base experiment plus optional per-profile patches
// under "profiles". The "paper" profile is the base itself; "smoke" applies
// its patch (if any) and caps the repeat count at three.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinncal/datagen/fem.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/loss.hpp"
#include "pinncal/optimizer.hpp"

namespace pinncal {

enum class CaseKind { kRodAnalytical, kRodCsv, kPlate };
enum class Profile { kSmoke, kPaper };
enum class StudyKind { kEstimateSensitivity, kCollocationConvergence, kNoiseSensitivity };

CaseKind case_kind_from_string(const std::string& s);
std::string to_string(CaseKind c);
Profile profile_from_string(const std::string& s);
std::string to_string(Profile p);
StudyKind study_kind_from_string(const std::string& s);
std::string to_string(StudyKind s);

struct StudyGrid {
  std::optional<StudyKind> kind;
  int repeats = 10;
  /// Initial estimates as multiples of the true values.
  std::vector<double> E_factors{1.0};
  std::vector<double> nu_factors{1.0};
  std::vector<int> collocation_counts;
  std::vector<double> noise_levels;
};

struct ExperimentConfig {
  std::string name = "experiment";
  CaseKind case_kind = CaseKind::kRodAnalytical;
  CalibrationMode mode = CalibrationMode::kEnhanced;
  WorkForm work_form = WorkForm::kSquared;
  std::uint64_t seed = 0;

  std::vector<int> hidden{8, 8};
  /// 2D: one single-output network per displacement component.
  bool separate_networks = true;

  double E_true = 210000.0;
  double nu_true = 0.3;
  double E_est_factor = 1.0;
  double nu_est_factor = 1.0;
  /// Starting value of the raw material variables in standard mode.
  double standard_initial = 1.0;

  LossWeights weights;

  int n_data = 128;
  int n_collocation = 128;
  int n_ext = 64;
  int n_validation = 1024;
  datagen::CollocationMode collocation_mode = datagen::CollocationMode::kCoincide;

  double noise_sigma = 0.0;

  datagen::RodCase rod;
  std::filesystem::path csv_path;
  datagen::PlateCase plate;

  opt::StopCriteria stop;

  StudyGrid study;

  std::filesystem::path output_dir = "results";
  int jobs = 1;

  int dim() const { return case_kind == CaseKind::kPlate ? 2 : 1; }

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError naming the
/// offending path. Relative csv paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, Profile profile = Profile::kPaper,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path, Profile profile = Profile::kPaper);

/// Canonical JSON of the resolved config (no profile section).
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Hash of the canonical JSON with the seed and output paths removed, so all
/// runs of one experiment share it.
std::string config_hash(const ExperimentConfig& cfg);

/// Independent stream seeds derived from one run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pinncal
