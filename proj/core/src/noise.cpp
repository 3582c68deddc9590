#include "pinncal/datagen/noise.hpp"

#include <cmath>
#include <random>

#include "pinncal/errors.hpp"

namespace pinncal::datagen {

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise standard deviation must be >= 0");
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& values, const NoiseSpec& spec) {
  spec.validate();
  if (spec.sigma == 0.0) return values;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> dist(0.0, spec.sigma);
  Eigen::MatrixXd out = values;
  // column-major walk: node by node, component by component
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) += dist(rng);
  }
  return out;
}

}  // namespace pinncal::datagen
