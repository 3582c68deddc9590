#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace pinncal::datagen {

struct NoiseSpec {
  /// Absolute standard deviation in mm.
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adds i.i.d. N(0, sigma^2) to every entry, independent of its magnitude.
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& values, const NoiseSpec& spec);

}  // namespace pinncal::datagen
