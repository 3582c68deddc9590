#include "pinncal/datagen/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "pinncal/errors.hpp"

namespace pinncal::datagen {

using Eigen::MatrixXd;

CollocationMode collocation_mode_from_string(const std::string& s) {
  if (s == "coincide") return CollocationMode::kCoincide;
  if (s == "independent") return CollocationMode::kIndependent;
  throw ConfigError("unknown collocation mode '" + s + "' (expected coincide or independent)");
}

std::string to_string(CollocationMode m) { return m == CollocationMode::kCoincide ? "coincide" : "independent"; }

std::vector<int> sample_pps(const Eigen::VectorXd& weights, int n, std::mt19937_64& rng) {
  const int count = static_cast<int>(weights.size());
  if (n < 0) throw ConfigError("sample size must be non-negative");
  if (n > count) {
    throw ConfigError("requested " + std::to_string(n) + " samples from only " + std::to_string(count) + " nodes");
  }
  if ((weights.array() < 0.0).any() || !weights.allFinite()) throw ConfigError("sampling weights must be >= 0");
  if (n == 0) return {};

  // Inclusion probabilities n w_i / sum(w), capping at one and rescaling the rest.
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(count);
  std::vector<bool> capped(static_cast<size_t>(count), false);
  int n_capped = 0;
  while (true) {
    double rest = 0.0;
    for (int i = 0; i < count; ++i) {
      if (!capped[static_cast<size_t>(i)]) rest += weights[i];
    }
    if (!(rest > 0.0)) throw ConfigError("not enough nodes with positive weight");
    const double scale = static_cast<double>(n - n_capped) / rest;
    bool changed = false;
    for (int i = 0; i < count; ++i) {
      if (capped[static_cast<size_t>(i)]) continue;
      pi[i] = scale * weights[i];
      if (pi[i] >= 1.0) {
        pi[i] = 1.0;
        capped[static_cast<size_t>(i)] = true;
        ++n_capped;
        changed = true;
      }
    }
    if (!changed) break;
  }

  std::vector<int> order(static_cast<size_t>(count));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0 - 1e-9);
  double next = unif(rng);
  double cum = 0.0;
  std::vector<int> out;
  out.reserve(static_cast<size_t>(n));
  for (int i : order) {
    cum += pi[i];
    if (cum > next && static_cast<int>(out.size()) < n) {
      out.push_back(i);
      next += 1.0;
    }
  }
  // guard against rounding in the cumulative sum
  for (size_t k = order.size(); static_cast<int>(out.size()) < n && k-- > 0;) {
    if (std::find(out.begin(), out.end(), order[k]) == out.end()) out.push_back(order[k]);
  }
  return out;
}

std::vector<int> sample_uniform_excluding(int count, int n, const std::vector<int>& taken, std::mt19937_64& rng) {
  std::vector<bool> used(static_cast<size_t>(count), false);
  for (int i : taken) used[static_cast<size_t>(i)] = true;
  std::vector<int> pool;
  for (int i = 0; i < count; ++i) {
    if (!used[static_cast<size_t>(i)]) pool.push_back(i);
  }
  if (n > static_cast<int>(pool.size())) {
    throw ConfigError("requested " + std::to_string(n) + " validation nodes but only " + std::to_string(pool.size()) +
                      " are left");
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<size_t>(n));
  return pool;
}

void PlateSampling::validate() const {
  if (n_data < 1 || n_collocation < 1 || n_ext < 1 || n_validation < 1) throw ConfigError("point counts must be positive");
  if (mode == CollocationMode::kCoincide && n_collocation != n_data) {
    throw ConfigError("coincident collocation needs as many collocation points as data points");
  }
}

namespace {

MatrixXd gather(const Eigen::Matrix2Xd& m, const std::vector<int>& idx) {
  MatrixXd out(2, static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
  return out;
}

}  // namespace

SampledCase sample_training_set(const FemSolution& solution, const Eigen::Matrix2Xd& observed, const PlateCase& plate,
                                const PlateSampling& options) {
  options.validate();
  plate.validate();
  const auto& mesh = solution.mesh;
  if (observed.cols() != mesh.num_nodes()) throw ConfigError("observed values do not match the mesh");
  std::mt19937_64 rng(options.seed);

  SampledCase out;
  TrainingSet& set = out.set;
  set.dim = 2;
  const auto data_idx = sample_pps(mesh.lumped_areas(), options.n_data, rng);
  set.data_points = gather(mesh.nodes, data_idx);
  set.data_values = gather(observed, data_idx);

  if (options.mode == CollocationMode::kCoincide) {
    set.pde_points = set.data_points;
  } else {
    std::uniform_real_distribution<double> unif(0.0, plate.length);
    set.pde_points.resize(2, options.n_collocation);
    const double r2 = plate.radius * plate.radius;
    for (int k = 0; k < options.n_collocation;) {
      const double x = unif(rng), y = unif(rng);
      const double dx = x - plate.length;
      if (dx * dx + y * y < r2) continue;
      set.pde_points.col(k++) = Eigen::Vector2d(x, y);
    }
  }
  set.work_points = set.pde_points;
  set.volume = plate.domain_area();

  set.ext_points.resize(2, options.n_ext);
  set.ext_tractions.resize(2, options.n_ext);
  for (int k = 0; k < options.n_ext; ++k) {
    set.ext_points.col(k) = Eigen::Vector2d(0.0, plate.length * (k + 0.5) / options.n_ext);
    set.ext_tractions.col(k) = plate.traction;
  }
  set.boundary_measure = plate.length;

  set.neumann_points = set.ext_points;
  set.neumann_tractions = set.ext_tractions;
  set.neumann_normals = MatrixXd::Zero(2, options.n_ext);
  set.neumann_normals.row(0).setConstant(-1.0);

  const auto val_idx = sample_uniform_excluding(mesh.num_nodes(), options.n_validation, data_idx, rng);
  out.validation_points = gather(mesh.nodes, val_idx);
  out.validation_values = gather(solution.displacements, val_idx);
  return out;
}

SampledCase rod_training_set(const RodCase& rod, int n_data, int n_validation) {
  rod.validate();
  SampledCase out;
  TrainingSet& set = out.set;
  set.dim = 1;
  const Eigen::VectorXd x = linspace(0.0, rod.length, n_data);
  set.data_points = x.transpose();
  set.data_values = rod_analytical(rod, x).transpose();
  set.pde_points = set.data_points;
  set.work_points = set.data_points;
  set.volume = rod.length * rod.area;
  set.ext_points = MatrixXd::Constant(1, 1, rod.length);
  set.ext_tractions = MatrixXd::Constant(1, 1, rod.traction);
  set.boundary_measure = rod.area;
  set.neumann_points = set.ext_points;
  set.neumann_normals = MatrixXd::Ones(1, 1);
  set.neumann_tractions = set.ext_tractions;

  const Eigen::VectorXd xv = linspace(0.0, rod.length, n_validation);
  out.validation_points = xv.transpose();
  out.validation_values = rod_analytical(rod, xv).transpose();
  return out;
}

}  // namespace pinncal::datagen
