#pragma once

// Linear-elastic constitutive laws, kinematics, stress divergence and work
// integrals.
//
// The tensor operations are templates over the scalar type so the same
// expressions evaluate on plain doubles (point evaluation, oracles) and on
// tape nodes (batched training losses).

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pinncal/network.hpp"

namespace pinncal::mech {

/// Half factor on both internal and external work.
inline constexpr bool WORK_HALF = true;
inline constexpr double kWorkFactor = WORK_HALF ? 0.5 : 1.0;

/// Largest admissible Poisson's ratio before a (K, G) pair counts as
/// incompressible.
inline constexpr double kPoissonLimit = 0.5 - 1e-6;

struct IsotropicElasticEnu {
  double E = 0.0;
  double nu = 0.0;
  void validate() const;
};

struct IsotropicElasticKG {
  double K = 0.0;
  double G = 0.0;
  void validate() const;
};

IsotropicElasticKG to_KG(const IsotropicElasticEnu& m);
IsotropicElasticEnu to_Enu(const IsotropicElasticKG& m);

enum class Ambient { kPlaneStress, kPlaneStrain };

Ambient ambient_from_string(const std::string& s);
std::string to_string(Ambient a);

template <class T>
struct Strain2D {
  T xx, yy, xy;
};

template <class T>
struct Stress2D {
  T xx, yy, xy;
};

/// grad[i][j] = d u_i / d x_j
template <class T>
using Gradient2D = std::array<std::array<T, 2>, 2>;

/// hess[i][j][k] = d^2 u_i / (d x_j d x_k)
template <class T>
using Hessian2D = std::array<std::array<std::array<T, 2>, 2>, 2>;

template <class T>
Strain2D<T> strain_from_gradient(const Gradient2D<T>& g) {
  return {g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0])};
}

/// Effective Lame pair of the in-plane operator sigma = lambda tr(eps) I + 2 mu eps.
template <class T>
struct Lame {
  T lambda;
  T mu;
};

/// Plane strain uses lambda = K - 2G/3 (bulk/deviatoric split with a 2D
/// trace); plane stress condenses the out-of-plane stress:
/// lambda* = 2G(3K - 2G)/(3K + 4G).
template <class T>
Lame<T> lame_from_KG(const T& K, const T& G, Ambient ambient) {
  if (ambient == Ambient::kPlaneStrain) return {K - (2.0 / 3.0) * G, G};
  return {(2.0 * G) * (3.0 * K - 2.0 * G) / (3.0 * K + 4.0 * G), G};
}

template <class T>
Stress2D<T> stress(const Lame<T>& m, const Strain2D<T>& e) {
  const T tr = e.xx + e.yy;
  const T lam_tr = m.lambda * tr;
  const T two_mu = 2.0 * m.mu;
  return {lam_tr + two_mu * e.xx, lam_tr + two_mu * e.yy, two_mu * e.xy};
}

/// sigma : eps
template <class T>
T energy_density(const Stress2D<T>& s, const Strain2D<T>& e) {
  return s.xx * e.xx + s.yy * e.yy + 2.0 * (s.xy * e.xy);
}

/// div sigma for constant material parameters, from displacement Hessians.
template <class T>
std::array<T, 2> divergence(const Lame<T>& m, const Hessian2D<T>& h) {
  const T lam2mu = m.lambda + 2.0 * m.mu;
  T rx = lam2mu * h[0][0][0] + m.lambda * h[1][1][0] + m.mu * (h[0][1][1] + h[1][0][1]);
  T ry = m.mu * (h[0][1][0] + h[1][0][0]) + m.lambda * h[0][0][1] + lam2mu * h[1][1][1];
  return {rx, ry};
}

double stress_1d(double E, double strain);

/// Plane-stress Hooke law in (E, nu).
Stress2D<double> stress_2d_plane_stress(const IsotropicElasticEnu& mat, const Strain2D<double>& e);

/// sigma = K tr(eps) I + 2G eps_D with the requested in-plane reduction.
Stress2D<double> stress_2d_KG(const IsotropicElasticKG& mat, const Strain2D<double>& e, Ambient ambient);

/// Initial estimates with trainable correction factors:
/// kappa = (1 + alpha) * kappa_est.
struct MaterialParameterization {
  std::vector<std::string> names;
  std::vector<double> estimates;

  int size() const { return static_cast<int>(estimates.size()); }
  void validate() const;
};

/// (1 + alpha_i) * kappa_est_i for every parameter.
std::vector<double> effective_parameters(const MaterialParameterization& p, std::span<const double> alphas);

/// False for any non-positive modulus, or (for a K, G pair) a Poisson ratio at
/// the incompressible limit.
bool feasible(const MaterialParameterization& p, std::span<const double> effective);

/// Elastic law of one calibration: the 1D rod modulus or an in-plane Lame pair.
struct ElasticModel {
  int dim = 1;
  double E = 0.0;
  Lame<double> lame{0.0, 0.0};

  static ElasticModel rod(double E);
  static ElasticModel plane(const IsotropicElasticKG& mat, Ambient ambient);
};

/// Displacement value and derivatives at one point, assembled from one or
/// more normalized networks whose outputs are concatenated in order.
struct FieldSample {
  int dim = 1;
  std::array<double, 2> u{};
  Gradient2D<double> grad{};
  Hessian2D<double> hess{};
};

FieldSample sample_field(std::span<const NormalizedNetwork> nets, std::span<const double> x);

/// div sigma at x (plus optional body force rho*b).
std::array<double, 2> divergence_of_stress(std::span<const NormalizedNetwork> nets, const ElasticModel& mat,
                                           std::span<const double> x);

/// 1/2 V/N sum sigma:eps over `points` (dim x N).
double internal_work(std::span<const NormalizedNetwork> nets, const ElasticModel& mat,
                     const Eigen::MatrixXd& points, double volume);

/// 1/2 V/N sum t.u over boundary `points` with `tractions` (both dim x N).
double external_work(std::span<const NormalizedNetwork> nets, const Eigen::MatrixXd& points,
                     const Eigen::MatrixXd& tractions, double boundary_measure);

/// Pairwise summation; result is independent of thread scheduling.
double pairwise_sum(std::span<const double> values);

}  // namespace pinncal::mech
