#pragma once

#include <span>

#include <Eigen/Core>

namespace pinncal::metrics {

/// 100 (identified - true) / true. Throws DomainError for a zero reference.
double relative_error(double identified, double true_value);

double mean(std::span<const double> samples);

/// Sample standard deviation (n - 1) over sqrt(n). Needs n >= 2.
double sem(std::span<const double> samples);

/// Mean of |RE| over repeat runs.
double mare(std::span<const double> relative_errors);

/// ||pred - ref||_2 / ||ref||_2 per row (displacement component).
Eigen::VectorXd relative_l2(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& ref);

struct GroupStats {
  int n = 0;
  double mean_re = 0.0;
  double mare = 0.0;
  /// SEM of the signed RE; zero for a single run.
  double sem = 0.0;
  double max_are = 0.0;
};

GroupStats summarize(std::span<const double> relative_errors);

}  // namespace pinncal::metrics
