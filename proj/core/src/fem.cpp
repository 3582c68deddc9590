#include "pinncal/datagen/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "pinncal/errors.hpp"

namespace pinncal::datagen {

using Eigen::Matrix2Xd;
using Eigen::VectorXd;

namespace {

using Mat36 = Eigen::Matrix<double, 3, 6>;
using Mat66 = Eigen::Matrix<double, 6, 6>;

Eigen::Matrix3d elasticity_matrix(const mech::IsotropicElasticEnu& m, mech::Ambient ambient) {
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();
  if (ambient == mech::Ambient::kPlaneStress) {
    const double c = m.E / (1.0 - m.nu * m.nu);
    D << c, c * m.nu, 0.0, c * m.nu, c, 0.0, 0.0, 0.0, c * 0.5 * (1.0 - m.nu);
  } else {
    const double c = m.E / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu));
    D << c * (1.0 - m.nu), c * m.nu, 0.0, c * m.nu, c * (1.0 - m.nu), 0.0, 0.0, 0.0, c * 0.5 * (1.0 - 2.0 * m.nu);
  }
  return D;
}

// Strain-displacement matrix with engineering shear strain in row 2.
Mat36 strain_matrix(const TriMesh& mesh, int e, double& area) {
  const auto t = mesh.triangles.col(e);
  const Eigen::Vector2d p[3] = {mesh.nodes.col(t[0]), mesh.nodes.col(t[1]), mesh.nodes.col(t[2])};
  area = mesh.element_area(e);
  Mat36 B = Mat36::Zero();
  for (int i = 0; i < 3; ++i) {
    const auto& pj = p[(i + 1) % 3];
    const auto& pk = p[(i + 2) % 3];
    const double b = pj.y() - pk.y();
    const double c = pk.x() - pj.x();
    B(0, 2 * i) = b;
    B(1, 2 * i + 1) = c;
    B(2, 2 * i) = c;
    B(2, 2 * i + 1) = b;
  }
  return B / (2.0 * area);
}

Eigen::Matrix<double, 6, 1> element_dofs(const TriMesh& mesh, const Matrix2Xd& u, int e) {
  Eigen::Matrix<double, 6, 1> ue;
  for (int i = 0; i < 3; ++i) ue.segment<2>(2 * i) = u.col(mesh.triangles(i, e));
  return ue;
}

}  // namespace

mech::Strain2D<double> element_strain(const TriMesh& mesh, const Matrix2Xd& u, int e) {
  double area = 0.0;
  const Eigen::Vector3d eps = strain_matrix(mesh, e, area) * element_dofs(mesh, u, e);
  return {eps[0], eps[1], 0.5 * eps[2]};
}

FemSolution fem_solve(const FemProblem& pb) {
  pb.mesh.validate();
  pb.material.validate();
  if (!(pb.thickness > 0.0)) throw ConfigError("thickness must be positive");
  const int nn = pb.mesh.num_nodes();
  const int ndof = 2 * nn;

  VectorXd f = VectorXd::Zero(ndof);
  for (const auto& load : pb.loads) {
    if (load.a < 0 || load.a >= nn || load.b < 0 || load.b >= nn) throw DataError("edge load references a missing node");
    const double len = (pb.mesh.nodes.col(load.a) - pb.mesh.nodes.col(load.b)).norm();
    const Eigen::Vector2d share = 0.5 * len * pb.thickness * load.traction;
    f.segment<2>(2 * load.a) += share;
    f.segment<2>(2 * load.b) += share;
  }

  VectorXd prescribed = VectorXd::Zero(ndof);
  std::vector<int> free_index(static_cast<size_t>(ndof), 0);
  for (const auto& fx : pb.fixed) {
    if (fx.node < 0 || fx.node >= nn || fx.component < 0 || fx.component > 1) {
      throw DataError("constraint references a missing dof");
    }
    const int d = 2 * fx.node + fx.component;
    free_index[static_cast<size_t>(d)] = -1;
    prescribed[d] = fx.value;
  }
  int nfree = 0;
  for (auto& idx : free_index) {
    if (idx == 0) idx = nfree++;
  }
  if (nfree == 0) throw DataError("every degree of freedom is constrained");

  const Eigen::Matrix3d D = elasticity_matrix(pb.material, pb.ambient);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(pb.mesh.num_elements()) * 36);
  VectorXd rhs(nfree);
  for (int d = 0; d < ndof; ++d) {
    if (free_index[static_cast<size_t>(d)] >= 0) rhs[free_index[static_cast<size_t>(d)]] = f[d];
  }
  std::vector<Mat66> ke(static_cast<size_t>(pb.mesh.num_elements()));
  for (int e = 0; e < pb.mesh.num_elements(); ++e) {
    double area = 0.0;
    const Mat36 B = strain_matrix(pb.mesh, e, area);
    ke[static_cast<size_t>(e)] = pb.thickness * area * B.transpose() * D * B;
    const Mat66& K = ke[static_cast<size_t>(e)];
    for (int a = 0; a < 6; ++a) {
      const int ga = 2 * pb.mesh.triangles(a / 2, e) + a % 2;
      const int fa = free_index[static_cast<size_t>(ga)];
      if (fa < 0) continue;
      for (int b = 0; b < 6; ++b) {
        const int gb = 2 * pb.mesh.triangles(b / 2, e) + b % 2;
        const int fb = free_index[static_cast<size_t>(gb)];
        if (fb >= 0) {
          trip.emplace_back(fa, fb, K(a, b));
        } else {
          rhs[fa] -= K(a, b) * prescribed[gb];
        }
      }
    }
  }
  Eigen::SparseMatrix<double> Kff(nfree, nfree);
  Kff.setFromTriplets(trip.begin(), trip.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kff);
  if (solver.info() != Eigen::Success) throw DataError("stiffness factorization failed");
  const VectorXd dvec = solver.vectorD();
  const double dmax = dvec.cwiseAbs().maxCoeff();
  if (!(dvec.minCoeff() > 1e-12 * dmax)) throw DataError("stiffness matrix is singular; check the constraints");
  const VectorXd uf = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !uf.allFinite()) throw DataError("sparse solve failed");

  FemSolution sol;
  sol.mesh = pb.mesh;
  VectorXd u = prescribed;
  for (int d = 0; d < ndof; ++d) {
    if (free_index[static_cast<size_t>(d)] >= 0) u[d] = uf[free_index[static_cast<size_t>(d)]];
  }
  const double rhs_norm = rhs.cwiseAbs().maxCoeff();
  sol.relative_residual = (Kff * uf - rhs).cwiseAbs().maxCoeff() / (rhs_norm > 0.0 ? rhs_norm : 1.0);

  // Internal forces K u, element by element; at constrained dofs they are the reactions.
  VectorXd ku = VectorXd::Zero(ndof);
  double w_int = 0.0;
  sol.max_strain = -std::numeric_limits<double>::infinity();
  sol.displacements = Eigen::Map<const Matrix2Xd>(u.data(), 2, nn);
  for (int e = 0; e < pb.mesh.num_elements(); ++e) {
    const auto ue = element_dofs(pb.mesh, sol.displacements, e);
    const Eigen::Matrix<double, 6, 1> fe = ke[static_cast<size_t>(e)] * ue;
    w_int += 0.5 * ue.dot(fe);
    for (int a = 0; a < 6; ++a) ku[2 * pb.mesh.triangles(a / 2, e) + a % 2] += fe[a];
    const auto eps = element_strain(pb.mesh, sol.displacements, e);
    const double c = 0.5 * (eps.xx + eps.yy);
    const double r = std::hypot(0.5 * (eps.xx - eps.yy), eps.xy);
    sol.max_strain = std::max(sol.max_strain, c + r);
  }
  VectorXd reactions = VectorXd::Zero(ndof);
  for (int d = 0; d < ndof; ++d) {
    if (free_index[static_cast<size_t>(d)] < 0) reactions[d] = ku[d] - f[d];
  }
  sol.reactions = Eigen::Map<const Matrix2Xd>(reactions.data(), 2, nn);
  sol.internal_work = w_int;
  sol.external_work = 0.5 * (f + reactions).dot(u);
  return sol;
}

void PlateCase::validate() const {
  if (!(length > 0.0)) throw ConfigError("plate edge length must be positive");
  if (!(radius > 0.0 && radius < length)) throw ConfigError("hole radius must lie in (0, L)");
  if (!(thickness > 0.0)) throw ConfigError("plate thickness must be positive");
  if (!traction.allFinite()) throw ConfigError("plate traction must be finite");
  material.validate();
  mesh.validate();
}

double PlateCase::domain_area() const { return length * length - 0.25 * std::numbers::pi * radius * radius; }

namespace {

// Boundary edges whose two nodes satisfy `on_line`.
template <class Pred>
std::vector<std::pair<int, int>> edges_on(const TriMesh& mesh, Pred on_line) {
  std::vector<std::pair<int, int>> out;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.triangles(k, e), b = mesh.triangles((k + 1) % 3, e);
      if (on_line(mesh.nodes.col(a)) && on_line(mesh.nodes.col(b))) out.emplace_back(a, b);
    }
  }
  return out;
}

}  // namespace

FemProblem plate_problem(const PlateCase& plate) {
  plate.validate();
  FemProblem pb;
  pb.mesh = plate_with_hole_mesh(plate.length, plate.radius, plate.mesh);
  pb.material = plate.material;
  pb.ambient = plate.ambient;
  pb.thickness = plate.thickness;
  const double tol = 1e-9 * plate.length;
  for (int i = 0; i < pb.mesh.num_nodes(); ++i) {
    const auto p = pb.mesh.nodes.col(i);
    if (std::abs(p.y()) < tol) pb.fixed.push_back({i, 1, 0.0});
    if (std::abs(p.x() - plate.length) < tol) pb.fixed.push_back({i, 0, 0.0});
  }
  for (auto [a, b] : edges_on(pb.mesh, [&](const Eigen::Vector2d& p) { return std::abs(p.x()) < tol; })) {
    pb.loads.push_back({a, b, plate.traction});
  }
  return pb;
}

FemSolution fem_solve_plate(const PlateCase& plate) { return fem_solve(plate_problem(plate)); }

FemProblem uniaxial_rectangle_problem(double a, double b, int nx, int ny, const mech::IsotropicElasticEnu& mat,
                                      double stress) {
  FemProblem pb;
  pb.mesh = rectangle_mesh(0.0, 0.0, a, b, nx, ny);
  pb.material = mat;
  pb.ambient = mech::Ambient::kPlaneStress;
  const double tol = 1e-9 * std::max(a, b);
  for (int i = 0; i < pb.mesh.num_nodes(); ++i) {
    const auto p = pb.mesh.nodes.col(i);
    if (std::abs(p.y()) < tol) pb.fixed.push_back({i, 1, 0.0});
    if (std::abs(p.x() - a) < tol) pb.fixed.push_back({i, 0, 0.0});
  }
  for (auto [n0, n1] : edges_on(pb.mesh, [&](const Eigen::Vector2d& p) { return std::abs(p.x()) < tol; })) {
    pb.loads.push_back({n0, n1, Eigen::Vector2d(-stress, 0.0)});
  }
  return pb;
}

}  // namespace pinncal::datagen
