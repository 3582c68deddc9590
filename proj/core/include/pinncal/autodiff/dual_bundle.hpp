#pragma once

// Second-order forward-mode numbers: a value together with its gradient and
// Hessian with respect to a small number of seeded inputs.

#include <cmath>
#include <span>

#include <Eigen/Core>

namespace pinncal::ad {

inline constexpr int kMaxInputs = 3;

using BundleVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxInputs, 1>;
using BundleMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxInputs, kMaxInputs>;

struct DualBundle {
  double value = 0.0;
  BundleVector first;
  BundleMatrix second;

  DualBundle() = default;
  /// Constant with `dim` zero derivatives.
  DualBundle(double v, int dim);

  /// Independent variable number `index` out of `dim`.
  static DualBundle variable(double v, int index, int dim);

  int dim() const { return static_cast<int>(first.size()); }
};

DualBundle operator+(const DualBundle& a, const DualBundle& b);
DualBundle operator-(const DualBundle& a, const DualBundle& b);
DualBundle operator*(const DualBundle& a, const DualBundle& b);
DualBundle operator*(double c, const DualBundle& a);
DualBundle operator+(const DualBundle& a, double c);
DualBundle& operator+=(DualBundle& a, const DualBundle& b);

/// f(a) given f, f', f'' evaluated at a.value.
DualBundle compose(const DualBundle& a, double f, double df, double d2f);
DualBundle tanh(const DualBundle& a);

}  // namespace pinncal::ad
