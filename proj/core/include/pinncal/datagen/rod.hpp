#pragma once

#include <Eigen/Core>

namespace pinncal::datagen {

/// Rod clamped at x = 0 and pulled by a traction at x = length.
struct RodCase {
  double length = 100.0;
  double traction = 100.0;
  double E = 210000.0;
  double area = 1.0;

  void validate() const;
};

/// u(x) = t x / E. Throws DomainError for points outside [0, L].
Eigen::VectorXd rod_analytical(const RodCase& rod, const Eigen::VectorXd& x);

/// n equidistant points including both ends.
Eigen::VectorXd linspace(double a, double b, int n);

}  // namespace pinncal::datagen
