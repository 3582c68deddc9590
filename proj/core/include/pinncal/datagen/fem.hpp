#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "pinncal/datagen/mesh.hpp"
#include "pinncal/mechanics.hpp"

namespace pinncal::datagen {

struct FixedDof {
  int node = 0;
  int component = 0;
  double value = 0.0;
};

/// Uniform traction on the straight segment between two boundary nodes.
struct EdgeLoad {
  int a = 0;
  int b = 0;
  Eigen::Vector2d traction{0.0, 0.0};
};

struct FemProblem {
  TriMesh mesh;
  mech::IsotropicElasticEnu material;
  mech::Ambient ambient = mech::Ambient::kPlaneStress;
  double thickness = 1.0;
  std::vector<FixedDof> fixed;
  std::vector<EdgeLoad> loads;
};

struct FemSolution {
  TriMesh mesh;
  /// 2 x N nodal displacements.
  Eigen::Matrix2Xd displacements;
  /// Nodal reaction forces at constrained dofs (zero elsewhere).
  Eigen::Matrix2Xd reactions;
  /// Largest principal strain over all elements.
  double max_strain = 0.0;
  /// ||K u - f||_inf / ||f||_inf on the free dofs.
  double relative_residual = 0.0;
  /// 1/2 u^T K u, from elementwise exact quadrature.
  double internal_work = 0.0;
  /// 1/2 f^T u.
  double external_work = 0.0;
};

/// Direct sparse solve of the linear-elastic problem on linear triangles.
/// Throws DataError if the constraints leave the system singular.
FemSolution fem_solve(const FemProblem& problem);

/// Constant strain of element `e` for the given nodal displacements.
mech::Strain2D<double> element_strain(const TriMesh& mesh, const Eigen::Matrix2Xd& u, int e);

struct PlateCase {
  double length = 100.0;
  double radius = 10.0;
  double thickness = 1.0;
  Eigen::Vector2d traction{-100.0, 0.0};
  mech::IsotropicElasticEnu material{210000.0, 0.3};
  mech::Ambient ambient = mech::Ambient::kPlaneStress;
  PlateMeshOptions mesh;

  void validate() const;
  /// Exact measure of the quadrant with the hole removed.
  double domain_area() const;
};

/// Quadrant with symmetry constraints u_y = 0 on y = 0 and u_x = 0 on x = L,
/// traction on x = 0, free top edge and hole.
FemProblem plate_problem(const PlateCase& plate);
FemSolution fem_solve_plate(const PlateCase& plate);

/// Rectangle [0, a] x [0, b] pulled by `stress` on x = 0, with u_x = 0 on
/// x = a and u_y = 0 on y = 0. The exact field is linear.
FemProblem uniaxial_rectangle_problem(double a, double b, int nx, int ny, const mech::IsotropicElasticEnu& mat,
                                      double stress);

}  // namespace pinncal::datagen
