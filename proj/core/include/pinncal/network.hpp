#pragma once

// Fully connected tanh networks and the affine input/output normalization
// wrapper used for all displacement approximations.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pinncal/autodiff/dual_bundle.hpp"
#include "pinncal/autodiff/tape.hpp"

namespace pinncal {

/// Hidden layers use tanh, the output layer is the identity.
///
/// Parameters flatten layer by layer: the weight matrix row-major, then the
/// bias vector.
struct FeedForwardNet {
  std::vector<int> sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int input_dim() const { return sizes.front(); }
  int output_dim() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  int num_parameters() const;

  void validate() const;

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  /// Plain forward pass.
  Eigen::VectorXd operator()(std::span<const double> x) const;
  /// Activations of the last hidden layer (empty for a single-layer net).
  Eigen::VectorXd hidden_output(std::span<const double> x) const;
};

/// Zero-initialized network with the given layer sizes.
FeedForwardNet make_network(std::span<const int> sizes);

/// Weights ~ N(0, 2/(fan_in+fan_out)), biases zero. Deterministic per seed.
FeedForwardNet glorot_normal_init(std::span<const int> sizes, std::uint64_t seed);

/// Value, gradient and Hessian of each raw output with respect to the raw
/// network inputs.
std::vector<ad::DualBundle> output_jacobian_hessian(const FeedForwardNet& net,
                                                    std::span<const double> x);

struct NormalizationSpec {
  Eigen::VectorXd x_min, x_max;
  Eigen::VectorXd u_min, u_max;

  /// Throws ConfigError on size mismatch or a degenerate range.
  void validate() const;

  /// Ranges taken from training coordinates (dim x N) and values (d_out x N).
  static NormalizationSpec from_data(const Eigen::MatrixXd& points, const Eigen::MatrixXd& values);
  /// Both transforms reduce to the identity map.
  static NormalizationSpec identity(int d_in, int d_out);

  /// d T_in_i / d x_i
  double input_scale(int i) const { return 2.0 / (x_max[i] - x_min[i]); }
  /// d T_out_j / d u_hat_j
  double output_scale(int j) const { return 0.5 * (u_max[j] - u_min[j]); }
};

Eigen::VectorXd transform_in(std::span<const double> x, const NormalizationSpec& spec);
Eigen::VectorXd transform_out(std::span<const double> u_hat, const NormalizationSpec& spec);

struct NormalizedNetwork {
  FeedForwardNet net;
  NormalizationSpec spec;

  int input_dim() const { return net.input_dim(); }
  int output_dim() const { return net.output_dim(); }
};

struct PointEvaluation {
  Eigen::VectorXd u;
  /// Per output: value and derivatives with respect to physical coordinates.
  std::vector<ad::DualBundle> derivatives;
  /// True if x lies outside the normalization range.
  bool extrapolated = false;
};

PointEvaluation evaluate(const NormalizedNetwork& nn, std::span<const double> x);

/// Displacement value and derivatives for a batch of points as tape nodes
/// (each 1 x N). Entries beyond the requested order are left unbound.
struct FieldJets {
  ad::Var value;
  std::array<ad::Var, ad::kMaxInputs> first;
  std::array<std::array<ad::Var, ad::kMaxInputs>, ad::kMaxInputs> second;
};

/// Records the batched forward pass of `nn`'s architecture with weights read
/// from `params` at `offset`, returning one FieldJets per output.
std::vector<FieldJets> record_field_jets(ad::Tape& tape, const NormalizedNetwork& nn,
                                         std::span<const double> params, int offset,
                                         const Eigen::MatrixXd& points, int order);

}  // namespace pinncal
