#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pinncal/datagen/fem.hpp"
#include "pinncal/datagen/rod.hpp"
#include "pinncal/loss.hpp"

namespace pinncal::datagen {

enum class CollocationMode { kCoincide, kIndependent };

CollocationMode collocation_mode_from_string(const std::string& s);
std::string to_string(CollocationMode m);

/// Draws `n` distinct indices with inclusion probability proportional to
/// `weights` (capped at one), by systematic sampling over a random order.
std::vector<int> sample_pps(const Eigen::VectorXd& weights, int n, std::mt19937_64& rng);

/// `n` distinct indices uniformly from [0, count) excluding `taken`.
std::vector<int> sample_uniform_excluding(int count, int n, const std::vector<int>& taken, std::mt19937_64& rng);

struct PlateSampling {
  int n_data = 4096;
  int n_collocation = 4096;
  int n_ext = 64;
  int n_validation = 4096;
  CollocationMode mode = CollocationMode::kCoincide;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SampledCase {
  TrainingSet set;
  Eigen::MatrixXd validation_points;
  /// Clean reference values at the validation points.
  Eigen::MatrixXd validation_values;
};

/// Training data from nodal `observed` values (possibly noisy), validation
/// against the clean FE field. Data nodes are drawn by area so that the
/// V/N-weighted sums over them stay unbiased on a graded mesh.
SampledCase sample_training_set(const FemSolution& solution, const Eigen::Matrix2Xd& observed,
                                const PlateCase& plate, const PlateSampling& options);

/// Rod with equidistant data (and collocation) points over [0, L].
SampledCase rod_training_set(const RodCase& rod, int n_data, int n_validation);

}  // namespace pinncal::datagen
