#include "pinncal/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pinncal/errors.hpp"

namespace pinncal {

namespace {

void check_sizes(std::span<const int> sizes) {
  if (sizes.size() < 2) throw ConfigError("a network needs at least an input and an output layer");
  for (int s : sizes) {
    if (s < 1) throw ConfigError("layer size must be >= 1, got " + std::to_string(s));
  }
}

}  // namespace

int FeedForwardNet::num_parameters() const {
  int n = 0;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * sizes[l] + sizes[l + 1];
  return n;
}

void FeedForwardNet::validate() const {
  check_sizes(sizes);
  if (weights.size() != sizes.size() - 1 || biases.size() != weights.size()) {
    throw ConfigError("layer count does not match the size list");
  }
  for (size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != sizes[l + 1] || weights[l].cols() != sizes[l] ||
        biases[l].size() != sizes[l + 1]) {
      throw ConfigError("layer " + std::to_string(l) + " has inconsistent shapes");
    }
  }
}

std::vector<double> FeedForwardNet::parameters() const {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(num_parameters()));
  for (size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) flat.push_back(biases[l][r]);
  }
  return flat;
}

void FeedForwardNet::set_parameters(std::span<const double> flat) {
  if (static_cast<int>(flat.size()) != num_parameters()) {
    throw ConfigError("parameter vector has the wrong length");
  }
  size_t k = 0;
  for (size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l][r] = flat[k++];
  }
}

Eigen::VectorXd FeedForwardNet::operator()(std::span<const double> x) const {
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (int l = 0; l < num_layers(); ++l) {
    y = weights[static_cast<size_t>(l)] * y + biases[static_cast<size_t>(l)];
    if (l + 1 < num_layers()) y = y.array().tanh().matrix();
  }
  return y;
}

Eigen::VectorXd FeedForwardNet::hidden_output(std::span<const double> x) const {
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (num_layers() < 2) return {};
  for (int l = 0; l + 1 < num_layers(); ++l) {
    y = (weights[static_cast<size_t>(l)] * y + biases[static_cast<size_t>(l)]).array().tanh().matrix();
  }
  return y;
}

FeedForwardNet make_network(std::span<const int> sizes) {
  check_sizes(sizes);
  FeedForwardNet net;
  net.sizes.assign(sizes.begin(), sizes.end());
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.weights.emplace_back(Eigen::MatrixXd::Zero(sizes[l + 1], sizes[l]));
    net.biases.emplace_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return net;
}

FeedForwardNet glorot_normal_init(std::span<const int> sizes, std::uint64_t seed) {
  FeedForwardNet net = make_network(sizes);
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < net.weights.size(); ++l) {
    const double fan_in = sizes[l];
    const double fan_out = sizes[l + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (fan_in + fan_out)));
    auto& w = net.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
  }
  return net;
}

std::vector<ad::DualBundle> output_jacobian_hessian(const FeedForwardNet& net,
                                                    std::span<const double> x) {
  const int dim = net.input_dim();
  if (static_cast<int>(x.size()) != dim) throw ConfigError("input has the wrong dimension");
  std::vector<ad::DualBundle> layer;
  layer.reserve(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) layer.push_back(ad::DualBundle::variable(x[static_cast<size_t>(i)], i, dim));

  for (int l = 0; l < net.num_layers(); ++l) {
    const auto& w = net.weights[static_cast<size_t>(l)];
    const auto& b = net.biases[static_cast<size_t>(l)];
    std::vector<ad::DualBundle> next;
    next.reserve(static_cast<size_t>(w.rows()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      ad::DualBundle z(b[r], dim);
      for (Eigen::Index c = 0; c < w.cols(); ++c) z += w(r, c) * layer[static_cast<size_t>(c)];
      next.push_back(l + 1 < net.num_layers() ? ad::tanh(z) : z);
    }
    layer = std::move(next);
  }
  return layer;
}

void NormalizationSpec::validate() const {
  if (x_min.size() != x_max.size() || u_min.size() != u_max.size() || x_min.size() == 0 ||
      u_min.size() == 0) {
    throw ConfigError("normalization ranges have inconsistent sizes");
  }
  for (Eigen::Index i = 0; i < x_min.size(); ++i) {
    if (!(x_max[i] > x_min[i])) throw ConfigError("degenerate input range in dimension " + std::to_string(i));
  }
  for (Eigen::Index j = 0; j < u_min.size(); ++j) {
    if (!(u_max[j] > u_min[j])) throw ConfigError("degenerate output range in dimension " + std::to_string(j));
  }
}

NormalizationSpec NormalizationSpec::from_data(const Eigen::MatrixXd& points, const Eigen::MatrixXd& values) {
  if (points.cols() == 0 || values.cols() == 0) throw ConfigError("cannot derive ranges from empty data");
  NormalizationSpec spec;
  spec.x_min = points.rowwise().minCoeff();
  spec.x_max = points.rowwise().maxCoeff();
  spec.u_min = values.rowwise().minCoeff();
  spec.u_max = values.rowwise().maxCoeff();
  spec.validate();
  return spec;
}

NormalizationSpec NormalizationSpec::identity(int d_in, int d_out) {
  NormalizationSpec spec;
  spec.x_min = Eigen::VectorXd::Constant(d_in, -1.0);
  spec.x_max = Eigen::VectorXd::Constant(d_in, 1.0);
  spec.u_min = Eigen::VectorXd::Constant(d_out, -1.0);
  spec.u_max = Eigen::VectorXd::Constant(d_out, 1.0);
  return spec;
}

Eigen::VectorXd transform_in(std::span<const double> x, const NormalizationSpec& spec) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = 2.0 * ((x[static_cast<size_t>(i)] - spec.x_min[i]) / (spec.x_max[i] - spec.x_min[i])) - 1.0;
  }
  return out;
}

Eigen::VectorXd transform_out(std::span<const double> u_hat, const NormalizationSpec& spec) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(u_hat.size()));
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    out[j] = (spec.u_max[j] - spec.u_min[j]) * (u_hat[static_cast<size_t>(j)] + 1.0) / 2.0 + spec.u_min[j];
  }
  return out;
}

PointEvaluation evaluate(const NormalizedNetwork& nn, std::span<const double> x) {
  const Eigen::VectorXd xn = transform_in(x, nn.spec);
  PointEvaluation out;
  out.extrapolated = (xn.array().abs() > 1.0 + 1e-12).any();
  auto raw = output_jacobian_hessian(nn.net, std::span<const double>(xn.data(), static_cast<size_t>(xn.size())));

  const int dim = nn.input_dim();
  Eigen::VectorXd in_scale(dim);
  for (int i = 0; i < dim; ++i) in_scale[i] = nn.spec.input_scale(i);

  Eigen::VectorXd raw_values(nn.output_dim());
  for (int j = 0; j < nn.output_dim(); ++j) raw_values[j] = raw[static_cast<size_t>(j)].value;
  out.u = transform_out(std::span<const double>(raw_values.data(), static_cast<size_t>(raw_values.size())), nn.spec);

  for (int j = 0; j < nn.output_dim(); ++j) {
    const double h = nn.spec.output_scale(j);
    auto& d = raw[static_cast<size_t>(j)];
    d.value = out.u[j];
    d.first = h * d.first.cwiseProduct(in_scale);
    d.second = h * (in_scale.asDiagonal() * d.second * in_scale.asDiagonal());
    out.derivatives.push_back(d);
  }
  return out;
}

std::vector<FieldJets> record_field_jets(ad::Tape& tape, const NormalizedNetwork& nn,
                                         std::span<const double> params, int offset,
                                         const Eigen::MatrixXd& points, int order) {
  const int dim = nn.input_dim();
  if (points.rows() != dim) throw ConfigError("point coordinates have the wrong dimension");
  if (order < 0 || order > 2) throw ConfigError("jet order must be 0, 1 or 2");
  const int n = static_cast<int>(points.cols());
  if (n == 0) throw ConfigError("empty point set");

  const ad::JetLayout layout{dim, order, n};
  const int ncomp = layout.components();

  // Input jet: normalized coordinates, unit first derivatives, zero curvature.
  Eigen::MatrixXd input = Eigen::MatrixXd::Zero(dim, ncomp * n);
  for (int i = 0; i < dim; ++i) {
    const double s = nn.spec.input_scale(i);
    input.row(i).head(n) = ((points.row(i).array() - nn.spec.x_min[i]) * s - 1.0).matrix();
    if (order >= 1) input.row(i).segment(layout.first(i) * n, n).setOnes();
  }
  ad::Var y = tape.constant(std::move(input));

  int cursor = offset;
  const auto& sizes = nn.net.sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int rows = sizes[l + 1], cols = sizes[l];
    ad::Var w = tape.parameter(params, cursor, rows, cols);
    cursor += rows * cols;
    ad::Var b = tape.parameter(params, cursor, rows, 1);
    cursor += rows;
    y = tape.affine(w, y, b, n);
    if (l + 2 < sizes.size()) y = tape.jet_tanh(y, layout);
  }

  std::vector<FieldJets> out;
  for (int j = 0; j < nn.output_dim(); ++j) {
    const double h = nn.spec.output_scale(j);
    const double center = 0.5 * (nn.spec.u_max[j] + nn.spec.u_min[j]);
    FieldJets f;
    f.value = tape.shift(tape.scale(tape.block(y, j, 0, 1, n), h), center);
    if (order >= 1) {
      for (int i = 0; i < dim; ++i) {
        f.first[static_cast<size_t>(i)] =
            tape.scale(tape.block(y, j, layout.first(i) * n, 1, n), h * nn.spec.input_scale(i));
      }
    }
    if (order >= 2) {
      for (int i = 0; i < dim; ++i) {
        for (int k = i; k < dim; ++k) {
          ad::Var d2 = tape.scale(tape.block(y, j, layout.second(i, k) * n, 1, n),
                                  h * nn.spec.input_scale(i) * nn.spec.input_scale(k));
          f.second[static_cast<size_t>(i)][static_cast<size_t>(k)] = d2;
          f.second[static_cast<size_t>(k)][static_cast<size_t>(i)] = d2;
        }
      }
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace pinncal
