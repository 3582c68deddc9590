#include "pinncal/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pinncal/errors.hpp"

namespace pinncal::opt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void StopCriteria::validate() const {
  if (max_iters < 1) throw ConfigError("max_iters must be positive");
  if (!(grad_tol > 0.0) || !(loss_change_tol > 0.0)) throw ConfigError("tolerances must be positive");
  if (max_line_search_steps < 1) throw ConfigError("max_line_search_steps must be positive");
  if (max_seconds < 0.0) throw ConfigError("max_seconds must be non-negative");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("line search constants need 0 < c1 < c2 < 1");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::kRunning: return "running";
    case Status::kGradientTolerance: return "gradient_tolerance";
    case Status::kLossChangeTolerance: return "loss_change_tolerance";
    case Status::kMaxIterations: return "max_iterations";
    case Status::kTimeLimit: return "time_limit";
    case Status::kLineSearchFailed: return "line_search_failed";
    case Status::kNonFiniteObjective: return "non_finite_objective";
  }
  return "unknown";
}

bool converged(Status s) { return s == Status::kGradientTolerance || s == Status::kLossChangeTolerance; }

namespace {

struct Sample {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
  VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& obj, const StopCriteria& c, const VectorXd& x, const VectorXd& p, double f0, double d0,
             int& evaluations)
      : obj_(obj), c_(c), x_(x), p_(p), f0_(f0), d0_(d0), flat_(1e-12 * std::abs(f0)), evals_(evaluations) {}

  /// Strong Wolfe step starting from `a1`; false if none was found.
  bool run(double a1, Sample& out) {
    Sample prev{0.0, f0_, d0_, {}};
    double a = a1;
    for (int i = 0; steps_ < c_.max_line_search_steps; ++i) {
      Sample cur = eval(a);
      if (!std::isfinite(cur.f) || !decrease(cur) || (i > 0 && cur.f > prev.f + flat_)) {
        return zoom(prev, cur, out);
      }
      if (std::abs(cur.d) <= -c_.c2 * d0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.d >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      a *= 2.0;
    }
    return false;
  }

 private:
  // Sufficient decrease. Close to a minimum the change in f drops below its
  // rounding error, so a step whose f is within that noise passes on the
  // slope alone (approximate Wolfe condition).
  bool decrease(const Sample& s) const {
    if (s.f <= f0_ + c_.c1 * s.a * d0_) return true;
    return s.f <= f0_ + flat_ && s.d <= (2.0 * c_.c1 - 1.0) * d0_;
  }

  Sample eval(double a) {
    ++steps_;
    ++evals_;
    Sample s;
    s.a = a;
    const VectorXd xa = x_ + a * p_;
    s.f = obj_(std::span<const double>(xa.data(), static_cast<size_t>(xa.size())), s.g);
    s.d = std::isfinite(s.f) ? s.g.dot(p_) : std::numeric_limits<double>::quiet_NaN();
    if (std::isnan(s.f)) s.f = std::numeric_limits<double>::infinity();
    return s;
  }

  // Minimizer of the cubic through both samples, or bisection when that is
  // undefined or too close to an end of the bracket.
  static double trial(const Sample& lo, const Sample& hi) {
    const double mid = 0.5 * (lo.a + hi.a);
    if (!std::isfinite(lo.f) || !std::isfinite(hi.f) || !std::isfinite(lo.d) || !std::isfinite(hi.d)) return mid;
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    const double disc = d1 * d1 - lo.d * hi.d;
    if (disc < 0.0) return mid;
    const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
    const double a = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / (hi.d - lo.d + 2.0 * d2);
    const double left = std::min(lo.a, hi.a), right = std::max(lo.a, hi.a);
    const double margin = 0.1 * (right - left);
    if (!std::isfinite(a) || a < left + margin || a > right - margin) return mid;
    return a;
  }

  bool zoom(Sample lo, Sample hi, Sample& out) {
    while (steps_ < c_.max_line_search_steps) {
      if (std::abs(hi.a - lo.a) < 1e-16 * std::max(1.0, std::abs(lo.a))) break;
      Sample cur = eval(trial(lo, hi));
      if (!std::isfinite(cur.f) || !decrease(cur) || cur.f > lo.f + flat_) {
        hi = std::move(cur);
        continue;
      }
      if (std::abs(cur.d) <= -c_.c2 * d0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.d * (hi.a - lo.a) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const Objective& obj_;
  const StopCriteria& c_;
  const VectorXd& x_;
  const VectorXd& p_;
  double f0_, d0_;
  double flat_;
  int& evals_;
  int steps_ = 0;
};

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

BfgsResult bfgs_minimize(const Objective& objective, VectorXd x0, const StopCriteria& criteria,
                         const IterationCallback& callback) {
  criteria.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto n = x0.size();

  BfgsResult result;
  OptimState& st = result.state;
  st.x = std::move(x0);
  st.H = MatrixXd::Identity(n, n);
  st.f = objective(std::span<const double>(st.x.data(), static_cast<size_t>(n)), st.g);
  st.evaluations = 1;
  if (!std::isfinite(st.f) || !st.g.allFinite()) {
    st.status = Status::kNonFiniteObjective;
    return result;
  }

  bool fresh_H = true;  // no curvature pair absorbed since the last reset
  bool reset_used = false;
  while (true) {
    if (inf_norm(st.g) < criteria.grad_tol) {
      st.status = Status::kGradientTolerance;
      break;
    }
    if (st.iter >= criteria.max_iters) {
      st.status = Status::kMaxIterations;
      break;
    }
    if (criteria.max_seconds > 0.0) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      if (dt.count() > criteria.max_seconds) {
        st.status = Status::kTimeLimit;
        break;
      }
    }

    VectorXd p = -(st.H * st.g);
    double d0 = st.g.dot(p);
    if (!(d0 < 0.0)) {
      st.H.setIdentity();
      fresh_H = true;
      ++st.resets;
      p = -st.g;
      d0 = st.g.dot(p);
    }
    const double a1 = fresh_H ? std::min(1.0, 1.0 / inf_norm(st.g)) : 1.0;

    Sample acc;
    LineSearch ls(objective, criteria, st.x, p, st.f, d0, st.evaluations);
    if (!ls.run(a1, acc)) {
      if (reset_used || fresh_H) {
        st.status = Status::kLineSearchFailed;
        break;
      }
      // One retry along steepest descent before giving up.
      reset_used = true;
      st.H.setIdentity();
      fresh_H = true;
      ++st.resets;
      continue;
    }
    reset_used = false;

    const VectorXd s = acc.a * p;
    const VectorXd y = acc.g - st.g;
    const double f_prev = st.f;
    st.x += s;
    st.f = acc.f;
    st.g = std::move(acc.g);
    ++st.iter;

    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh_H) {
        st.H *= sy / y.squaredNorm();
        fresh_H = false;
      }
      const double rho = 1.0 / sy;
      const VectorXd Hy = st.H * y;
      const double yHy = y.dot(Hy);
      st.H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
      st.H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
    } else {
      ++st.skipped_updates;
    }

    result.history.push_back({st.iter, st.f, inf_norm(st.g), acc.a});
    if (callback) callback(st);

    if (std::abs(f_prev - st.f) <= criteria.loss_change_tol * std::abs(f_prev)) {
      st.status = Status::kLossChangeTolerance;
      break;
    }
  }
  return result;
}

}  // namespace pinncal::opt
