#include "pinncal/checkpoint.hpp"

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

json to_json(const NormalizedNetwork& nn) {
  json weights = json::array();
  json biases = json::array();
  for (int l = 0; l < nn.net.num_layers(); ++l) {
    const auto& w = nn.net.weights[static_cast<size_t>(l)];
    std::vector<double> row_major;
    row_major.reserve(static_cast<size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    }
    weights.push_back(row_major);
    biases.push_back(vector_json(nn.net.biases[static_cast<size_t>(l)]));
  }
  return json{{"layer_sizes", nn.net.sizes},
              {"weights", weights},
              {"biases", biases},
              {"normalization",
               {{"x_min", vector_json(nn.spec.x_min)},
                {"x_max", vector_json(nn.spec.x_max)},
                {"u_min", vector_json(nn.spec.u_min)},
                {"u_max", vector_json(nn.spec.u_max)}}}};
}

NormalizedNetwork normalized_network_from_json(const json& j) {
  try {
    const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
    NormalizedNetwork nn{make_network(sizes), {}};
    const auto& weights = j.at("weights");
    const auto& biases = j.at("biases");
    if (weights.size() != sizes.size() - 1 || biases.size() != sizes.size() - 1) {
      throw DataError("checkpoint: layer count does not match layer_sizes");
    }
    for (size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto w = weights[l].get<std::vector<double>>();
      auto& target = nn.net.weights[l];
      if (static_cast<Eigen::Index>(w.size()) != target.size()) throw DataError("checkpoint: weight size mismatch");
      for (Eigen::Index r = 0; r < target.rows(); ++r) {
        for (Eigen::Index c = 0; c < target.cols(); ++c) target(r, c) = w[static_cast<size_t>(r * target.cols() + c)];
      }
      nn.net.biases[l] = vector_from(biases[l]);
    }
    nn.net.validate();
    const auto& norm = j.at("normalization");
    nn.spec.x_min = vector_from(norm.at("x_min"));
    nn.spec.x_max = vector_from(norm.at("x_max"));
    nn.spec.u_min = vector_from(norm.at("u_min"));
    nn.spec.u_max = vector_from(norm.at("u_max"));
    nn.spec.validate();
    return nn;
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

json to_json(const Checkpoint& ckpt) {
  json nets = json::array();
  for (const auto& nn : ckpt.nets) nets.push_back(to_json(nn));
  return json{{"networks", nets},
              {"parameter_names", ckpt.parameter_names},
              {"estimates", ckpt.estimates},
              {"correction_factors", ckpt.correction_factors}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint ckpt;
  try {
    for (const auto& n : j.at("networks")) ckpt.nets.push_back(normalized_network_from_json(n));
    ckpt.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
    ckpt.estimates = j.at("estimates").get<std::vector<double>>();
    ckpt.correction_factors = j.at("correction_factors").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  if (ckpt.estimates.size() != ckpt.correction_factors.size() ||
      ckpt.parameter_names.size() != ckpt.estimates.size()) {
    throw DataError("checkpoint: material parameter arrays differ in length");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_atomic(path, to_json(ckpt).dump(2));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(json::parse(read_text(path)));
}

}  // namespace pinncal
