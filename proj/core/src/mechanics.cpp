#include "pinncal/mechanics.hpp"

#include <cmath>
#include <string>

#include "pinncal/errors.hpp"

namespace pinncal::mech {

void IsotropicElasticEnu::validate() const {
  if (!(E > 0.0) || !std::isfinite(E)) throw DomainError("Young's modulus must be positive");
  if (!(nu > -1.0) || !(nu < 0.5)) throw DomainError("Poisson's ratio must lie in (-1, 0.5)");
}

void IsotropicElasticKG::validate() const {
  if (!(K > 0.0) || !std::isfinite(K)) throw DomainError("bulk modulus must be positive");
  if (!(G > 0.0) || !std::isfinite(G)) throw DomainError("shear modulus must be positive");
}

IsotropicElasticKG to_KG(const IsotropicElasticEnu& m) {
  m.validate();
  return {m.E / (3.0 * (1.0 - 2.0 * m.nu)), m.E / (2.0 * (1.0 + m.nu))};
}

IsotropicElasticEnu to_Enu(const IsotropicElasticKG& m) {
  m.validate();
  const double s = 3.0 * m.K + m.G;
  return {9.0 * m.K * m.G / s, (3.0 * m.K - 2.0 * m.G) / (2.0 * s)};
}

Ambient ambient_from_string(const std::string& s) {
  if (s == "plane_stress") return Ambient::kPlaneStress;
  if (s == "plane_strain") return Ambient::kPlaneStrain;
  throw ConfigError("unknown ambient state '" + s + "' (expected plane_stress or plane_strain)");
}

std::string to_string(Ambient a) { return a == Ambient::kPlaneStress ? "plane_stress" : "plane_strain"; }

double stress_1d(double E, double strain) {
  if (!(E > 0.0)) throw DomainError("Young's modulus must be positive");
  return E * strain;
}

Stress2D<double> stress_2d_plane_stress(const IsotropicElasticEnu& mat, const Strain2D<double>& e) {
  mat.validate();
  const double c = mat.E / (1.0 - mat.nu * mat.nu);
  return {c * (e.xx + mat.nu * e.yy), c * (e.yy + mat.nu * e.xx), c * (1.0 - mat.nu) * e.xy};
}

Stress2D<double> stress_2d_KG(const IsotropicElasticKG& mat, const Strain2D<double>& e, Ambient ambient) {
  const IsotropicElasticEnu enu = to_Enu(mat);
  if (!(enu.nu < kPoissonLimit)) throw DomainError("material is at the incompressible limit");
  if (ambient == Ambient::kPlaneStress) return stress_2d_plane_stress(enu, e);
  const double tr = e.xx + e.yy;
  const double dev_shift = tr / 3.0;
  return {mat.K * tr + 2.0 * mat.G * (e.xx - dev_shift), mat.K * tr + 2.0 * mat.G * (e.yy - dev_shift),
          2.0 * mat.G * e.xy};
}

void MaterialParameterization::validate() const {
  if (estimates.empty()) throw ConfigError("no material parameters to identify");
  if (names.size() != estimates.size()) throw ConfigError("material parameter names and estimates differ in length");
  for (size_t i = 0; i < estimates.size(); ++i) {
    if (!(estimates[i] > 0.0) || !std::isfinite(estimates[i])) {
      throw ConfigError("initial estimate for " + names[i] + " must be positive");
    }
  }
}

std::vector<double> effective_parameters(const MaterialParameterization& p, std::span<const double> alphas) {
  if (static_cast<int>(alphas.size()) != p.size()) throw ConfigError("correction factor count mismatch");
  std::vector<double> out(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) out[i] = (1.0 + alphas[i]) * p.estimates[i];
  return out;
}

bool feasible(const MaterialParameterization& p, std::span<const double> effective) {
  for (double v : effective) {
    if (!(v > 0.0) || !std::isfinite(v)) return false;
  }
  if (p.size() == 2) {
    const double K = effective[0], G = effective[1];
    const double nu = (3.0 * K - 2.0 * G) / (2.0 * (3.0 * K + G));
    if (!(nu < kPoissonLimit)) return false;
  }
  return true;
}

ElasticModel ElasticModel::rod(double E) {
  if (!(E > 0.0)) throw DomainError("Young's modulus must be positive");
  ElasticModel m;
  m.dim = 1;
  m.E = E;
  return m;
}

ElasticModel ElasticModel::plane(const IsotropicElasticKG& mat, Ambient ambient) {
  mat.validate();
  ElasticModel m;
  m.dim = 2;
  m.lame = lame_from_KG(mat.K, mat.G, ambient);
  return m;
}

FieldSample sample_field(std::span<const NormalizedNetwork> nets, std::span<const double> x) {
  if (nets.empty()) throw ConfigError("no displacement networks");
  FieldSample s;
  s.dim = static_cast<int>(x.size());
  if (s.dim < 1 || s.dim > 2) throw ConfigError("only 1D and 2D fields are supported");
  int comp = 0;
  for (const auto& nn : nets) {
    if (nn.input_dim() != s.dim) throw ConfigError("network input dimension does not match the point");
    const PointEvaluation ev = evaluate(nn, x);
    for (const auto& d : ev.derivatives) {
      if (comp >= s.dim) throw ConfigError("networks produce more components than the field dimension");
      const size_t c = static_cast<size_t>(comp);
      s.u[c] = d.value;
      for (int j = 0; j < s.dim; ++j) {
        s.grad[c][static_cast<size_t>(j)] = d.first[j];
        for (int k = 0; k < s.dim; ++k) s.hess[c][static_cast<size_t>(j)][static_cast<size_t>(k)] = d.second(j, k);
      }
      ++comp;
    }
  }
  if (comp != s.dim) throw ConfigError("networks produce fewer components than the field dimension");
  return s;
}

std::array<double, 2> divergence_of_stress(std::span<const NormalizedNetwork> nets, const ElasticModel& mat,
                                           std::span<const double> x) {
  const FieldSample s = sample_field(nets, x);
  if (s.dim != mat.dim) throw ConfigError("material and field dimensions differ");
  if (s.dim == 1) return {mat.E * s.hess[0][0][0], 0.0};
  return divergence(mat.lame, s.hess);
}

double internal_work(std::span<const NormalizedNetwork> nets, const ElasticModel& mat,
                     const Eigen::MatrixXd& points, double volume) {
  const auto n = points.cols();
  if (n == 0) throw ConfigError("internal work needs at least one point");
  std::vector<double> dens(static_cast<size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::VectorXd x = points.col(p);
    const FieldSample s = sample_field(nets, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
    if (s.dim == 1) {
      dens[static_cast<size_t>(p)] = mat.E * s.grad[0][0] * s.grad[0][0];
    } else {
      const auto eps = strain_from_gradient(s.grad);
      dens[static_cast<size_t>(p)] = energy_density(stress(mat.lame, eps), eps);
    }
  }
  return kWorkFactor * volume / static_cast<double>(n) * pairwise_sum(dens);
}

double external_work(std::span<const NormalizedNetwork> nets, const Eigen::MatrixXd& points,
                     const Eigen::MatrixXd& tractions, double boundary_measure) {
  const auto n = points.cols();
  if (n == 0) throw ConfigError("external work needs at least one boundary point");
  if (tractions.cols() != n || tractions.rows() != points.rows()) {
    throw ConfigError("traction array does not match the boundary points");
  }
  std::vector<double> terms(static_cast<size_t>(n));
  for (Eigen::Index p = 0; p < n; ++p) {
    const Eigen::VectorXd x = points.col(p);
    const FieldSample s = sample_field(nets, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
    double tu = 0.0;
    for (int c = 0; c < s.dim; ++c) tu += tractions(c, p) * s.u[static_cast<size_t>(c)];
    terms[static_cast<size_t>(p)] = tu;
  }
  return kWorkFactor * boundary_measure / static_cast<double>(n) * pairwise_sum(terms);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace pinncal::mech
