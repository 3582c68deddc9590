#include "pinncal/datagen/rod.hpp"

#include <cmath>
#include <string>

#include "pinncal/errors.hpp"

namespace pinncal::datagen {

void RodCase::validate() const {
  if (!(length > 0.0)) throw ConfigError("rod length must be positive");
  if (!(E > 0.0)) throw ConfigError("rod modulus must be positive");
  if (!(area > 0.0)) throw ConfigError("rod cross-section must be positive");
  if (!std::isfinite(traction)) throw ConfigError("rod traction must be finite");
}

Eigen::VectorXd rod_analytical(const RodCase& rod, const Eigen::VectorXd& x) {
  rod.validate();
  Eigen::VectorXd u(x.size());
  const double tol = 1e-12 * rod.length;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= -tol && x[i] <= rod.length + tol)) {
      throw DomainError("point " + std::to_string(x[i]) + " lies outside the rod");
    }
    u[i] = rod.traction * x[i] / rod.E;
  }
  return u;
}

Eigen::VectorXd linspace(double a, double b, int n) {
  if (n < 2) throw ConfigError("linspace needs at least two points");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v[n - 1] = b;
  return v;
}

}  // namespace pinncal::datagen
