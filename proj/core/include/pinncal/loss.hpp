#pragma once

// Composite training objective.
//
// LossEvaluator records the whole loss on a tape once and replays it for each
// parameter vector. The free functions below compute the same terms point by
// point from plain network evaluations and serve as the reference path.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pinncal/mechanics.hpp"
#include "pinncal/network.hpp"

namespace pinncal {

enum class CalibrationMode { kStandard, kEnhanced };
enum class WorkForm { kSquared, kSigned };

CalibrationMode mode_from_string(const std::string& s);
std::string to_string(CalibrationMode m);
WorkForm work_form_from_string(const std::string& s);
std::string to_string(WorkForm f);

/// All point sets are stored column-wise (dim x N).
struct TrainingSet {
  int dim = 1;

  Eigen::MatrixXd data_points;
  Eigen::MatrixXd data_values;

  Eigen::MatrixXd pde_points;
  /// rho*b at the PDE points; empty means no body force.
  Eigen::MatrixXd body_force;

  Eigen::MatrixXd work_points;
  double volume = 0.0;

  Eigen::MatrixXd ext_points;
  Eigen::MatrixXd ext_tractions;
  double boundary_measure = 0.0;

  /// Traction boundary condition points (standard mode).
  Eigen::MatrixXd neumann_points;
  Eigen::MatrixXd neumann_normals;
  Eigen::MatrixXd neumann_tractions;

  /// Throws ConfigError on inconsistent shapes or empty required sets.
  void validate(CalibrationMode mode) const;
};

struct LossWeights {
  double data = 1e5;
  double pde = 1.0;
  double bc = 1.0;

  void validate() const;
};

struct LossBreakdown {
  int dim = 1;
  double pde = 0.0;
  /// Signed W_int - W_ext.
  double work = 0.0;
  /// Contribution of the work term to the objective (squared or signed).
  double work_objective = 0.0;
  double data_x = 0.0;
  double data_y = 0.0;
  double bc = 0.0;
  double total = 0.0;

  double data() const { return data_x + data_y; }
};

/// Componentwise mean of the observed displacements (d_out x N).
Eigen::VectorXd characteristic_displacement(const Eigen::MatrixXd& values);

/// Per-component relative MSE. Throws ConfigError if any u_char entry is zero.
Eigen::VectorXd data_loss(std::span<const NormalizedNetwork> nets, const Eigen::MatrixXd& points,
                          const Eigen::MatrixXd& values, const Eigen::VectorXd& u_char);

/// Mean of |div sigma + rho*b|^2 over the points.
double pde_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat,
                const Eigen::MatrixXd& points, const Eigen::MatrixXd& body_force = {});

/// Signed W_int - W_ext.
double work_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat, const TrainingSet& set);

/// Mean of |sigma.n - t|^2 over the traction boundary points.
double bc_neumann_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat,
                       const Eigen::MatrixXd& points, const Eigen::MatrixXd& normals,
                       const Eigen::MatrixXd& tractions);

/// Fills `total` (and `work_objective`) from the component values.
LossBreakdown total_loss(CalibrationMode mode, WorkForm form, const LossWeights& weights, LossBreakdown parts);

struct LossConfig {
  CalibrationMode mode = CalibrationMode::kEnhanced;
  WorkForm work_form = WorkForm::kSquared;
  LossWeights weights;
  mech::Ambient ambient = mech::Ambient::kPlaneStress;
  /// Overrides the data mean when non-empty.
  Eigen::VectorXd u_char;
};

/// How the optimizer variables map to material parameters.
/// Scaled: kappa = (1 + alpha) kappa_est with alpha starting at 0.
/// Raw: the variable is kappa itself, starting at kappa_est.
struct MaterialVariables {
  mech::MaterialParameterization parameterization;
  bool scaled = true;

  std::vector<double> initial() const;
  std::vector<double> effective(std::span<const double> vars) const;
};

/// Objective over the flat vector [theta_1, ..., theta_k, material variables].
class LossEvaluator {
 public:
  LossEvaluator(std::vector<NormalizedNetwork> nets, MaterialVariables material, TrainingSet set, LossConfig config);
  ~LossEvaluator();

  LossEvaluator(const LossEvaluator&) = delete;
  LossEvaluator& operator=(const LossEvaluator&) = delete;

  int num_parameters() const { return num_parameters_; }
  int num_network_parameters() const { return num_network_parameters_; }
  const Eigen::VectorXd& u_char() const { return u_char_; }
  const TrainingSet& training_set() const { return set_; }
  const LossConfig& config() const { return config_; }
  const MaterialVariables& material() const { return material_; }

  /// Network weights of the template nets followed by the initial material variables.
  std::vector<double> initial_parameters() const;

  /// Objective value; writes the gradient into `grad`. Returns +inf (and a
  /// zero gradient) for infeasible material parameters.
  double operator()(std::span<const double> x, Eigen::VectorXd& grad);

  /// Component values at `x`. Infeasible points report +inf totals.
  LossBreakdown breakdown(std::span<const double> x);

  std::vector<NormalizedNetwork> networks(std::span<const double> x) const;
  std::vector<double> material_variables(std::span<const double> x) const;
  std::vector<double> effective_parameters(std::span<const double> x) const;

 private:
  struct Recording;

  bool evaluate(std::span<const double> x);
  void record(std::span<const double> x);

  std::vector<NormalizedNetwork> nets_;
  MaterialVariables material_;
  TrainingSet set_;
  LossConfig config_;
  Eigen::VectorXd u_char_;
  int num_network_parameters_ = 0;
  int num_parameters_ = 0;
  std::unique_ptr<Recording> rec_;
  LossBreakdown last_;
  std::vector<double> last_x_;
};

struct HistoryRow {
  int iter = 0;
  LossBreakdown loss;
  std::vector<double> material_vars;
};

/// CSV with columns iter, pde, work, data_x, data_y, total, alpha_<name>...
std::string history_csv(std::span<const HistoryRow> rows, const std::vector<std::string>& parameter_names);

}  // namespace pinncal
