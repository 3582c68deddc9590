#pragma once

// Dense BFGS with a strong-Wolfe line search.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pinncal::opt {

struct StopCriteria {
  int max_iters = 5000;
  /// Stop when the infinity norm of the gradient drops below this.
  double grad_tol = 1e-10;
  /// Stop when |f_k - f_{k+1}| <= loss_change_tol * |f_k|.
  double loss_change_tol = 1e-14;
  int max_line_search_steps = 40;
  /// Wall-clock budget in seconds; 0 disables it.
  double max_seconds = 0.0;

  double c1 = 1e-4;
  double c2 = 0.9;

  void validate() const;
};

enum class Status {
  kRunning,
  kGradientTolerance,
  kLossChangeTolerance,
  kMaxIterations,
  kTimeLimit,
  kLineSearchFailed,
  kNonFiniteObjective,
};

std::string to_string(Status s);
bool converged(Status s);

struct OptimState {
  Eigen::VectorXd x;
  /// Inverse Hessian approximation.
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double f = 0.0;
  int iter = 0;
  int evaluations = 0;
  int skipped_updates = 0;
  int resets = 0;
  Status status = Status::kRunning;
};

struct IterationRecord {
  int iter = 0;
  double f = 0.0;
  double grad_inf = 0.0;
  double step = 0.0;
};

/// Returns f(x) and writes the gradient. May return +inf for infeasible x.
using Objective = std::function<double(std::span<const double>, Eigen::VectorXd&)>;
/// Called after every accepted iteration with the new iterate.
using IterationCallback = std::function<void(const OptimState&)>;

struct BfgsResult {
  OptimState state;
  std::vector<IterationRecord> history;
};

BfgsResult bfgs_minimize(const Objective& objective, Eigen::VectorXd x0, const StopCriteria& criteria,
                         const IterationCallback& callback = {});

}  // namespace pinncal::opt
