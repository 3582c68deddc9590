#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pinncal/network.hpp"

namespace pinncal {

/// Trained state of a calibration: the displacement networks with their
/// normalization and the material correction factors.
struct Checkpoint {
  std::vector<NormalizedNetwork> nets;
  std::vector<std::string> parameter_names;
  std::vector<double> estimates;
  std::vector<double> correction_factors;
};

nlohmann::json to_json(const NormalizedNetwork& nn);
NormalizedNetwork normalized_network_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pinncal
