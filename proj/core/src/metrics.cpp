#include "pinncal/metrics.hpp"

#include <cmath>
#include <string>

#include "pinncal/errors.hpp"

namespace pinncal::metrics {

double relative_error(double identified, double true_value) {
  if (true_value == 0.0) throw DomainError("relative error against a zero reference");
  return 100.0 * (identified - true_value) / true_value;
}

double mean(std::span<const double> samples) {
  if (samples.empty()) throw ConfigError("mean of an empty sample");
  double s = 0.0;
  for (double v : samples) s += v;
  return s / static_cast<double>(samples.size());
}

double sem(std::span<const double> samples) {
  const auto n = samples.size();
  if (n < 2) throw ConfigError("the standard error needs at least two samples, got " + std::to_string(n));
  const double m = mean(samples);
  double ss = 0.0;
  for (double v : samples) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double mare(std::span<const double> relative_errors) {
  if (relative_errors.empty()) throw ConfigError("MARE of an empty sample");
  double s = 0.0;
  for (double v : relative_errors) s += std::abs(v);
  return s / static_cast<double>(relative_errors.size());
}

Eigen::VectorXd relative_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref) {
  if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) throw ConfigError("prediction and reference differ in shape");
  Eigen::VectorXd out(ref.rows());
  for (Eigen::Index c = 0; c < ref.rows(); ++c) {
    const double denom = ref.row(c).norm();
    if (denom == 0.0) throw DomainError("reference component " + std::to_string(c) + " has zero norm");
    out[c] = (pred.row(c) - ref.row(c)).norm() / denom;
  }
  return out;
}

GroupStats summarize(std::span<const double> relative_errors) {
  GroupStats g;
  g.n = static_cast<int>(relative_errors.size());
  if (g.n == 0) return g;
  g.mean_re = mean(relative_errors);
  g.mare = mare(relative_errors);
  g.sem = g.n >= 2 ? sem(relative_errors) : 0.0;
  for (double v : relative_errors) g.max_are = std::max(g.max_are, std::abs(v));
  return g;
}

}  // namespace pinncal::metrics
