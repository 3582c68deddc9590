#include "pinncal/datagen/mesh.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pinncal/errors.hpp"

namespace pinncal::datagen {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

// Splits the quad (p00, p10, p11, p01) along its shorter diagonal into two
// counter-clockwise triangles.
void split_quad(const Eigen::Matrix2Xd& nodes, int p00, int p10, int p11, int p01, std::vector<Eigen::Vector3i>& out) {
  const double d1 = (nodes.col(p00) - nodes.col(p11)).squaredNorm();
  const double d2 = (nodes.col(p10) - nodes.col(p01)).squaredNorm();
  Eigen::Vector3i t1, t2;
  if (d1 <= d2) {
    t1 = {p00, p10, p11};
    t2 = {p00, p11, p01};
  } else {
    t1 = {p00, p10, p01};
    t2 = {p10, p11, p01};
  }
  for (Eigen::Vector3i t : {t1, t2}) {
    if (signed_area(nodes.col(t[0]), nodes.col(t[1]), nodes.col(t[2])) < 0.0) std::swap(t[1], t[2]);
    out.push_back(t);
  }
}

Eigen::Matrix3Xi pack(const std::vector<Eigen::Vector3i>& tris) {
  Eigen::Matrix3Xi m(3, static_cast<Eigen::Index>(tris.size()));
  for (size_t e = 0; e < tris.size(); ++e) m.col(static_cast<Eigen::Index>(e)) = tris[e];
  return m;
}

}  // namespace

double TriMesh::element_area(int e) const {
  const auto t = triangles.col(e);
  return signed_area(nodes.col(t[0]), nodes.col(t[1]), nodes.col(t[2]));
}

double TriMesh::area() const {
  double a = 0.0;
  for (int e = 0; e < num_elements(); ++e) a += element_area(e);
  return a;
}

Eigen::VectorXd TriMesh::lumped_areas() const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(num_nodes());
  for (int e = 0; e < num_elements(); ++e) {
    const double third = element_area(e) / 3.0;
    for (int k = 0; k < 3; ++k) a[triangles(k, e)] += third;
  }
  return a;
}

void TriMesh::validate() const {
  if (num_nodes() < 3 || num_elements() < 1) throw DataError("mesh is empty");
  for (int e = 0; e < num_elements(); ++e) {
    for (int k = 0; k < 3; ++k) {
      const int n = triangles(k, e);
      if (n < 0 || n >= num_nodes()) throw DataError("element " + std::to_string(e) + " references a missing node");
    }
    if (!(element_area(e) > 0.0)) throw DataError("element " + std::to_string(e) + " is degenerate or inverted");
  }
}

void PlateMeshOptions::validate() const {
  if (edge_divisions < 1 || radial_divisions < 1) throw ConfigError("mesh division counts must be positive");
  if (!(grading >= 0.0) || grading > 20.0) throw ConfigError("mesh grading must lie in [0, 20]");
}

TriMesh plate_with_hole_mesh(double length, double radius, const PlateMeshOptions& options) {
  options.validate();
  if (!(radius > 0.0) || !(radius < length)) throw ConfigError("hole radius must lie in (0, L)");
  const int n = options.edge_divisions;
  const int na = 2 * n;
  const int m = options.radial_divisions;
  const double beta = options.grading;
  auto grade = [beta](double r) { return beta > 0.0 ? std::expm1(beta * r) / std::expm1(beta) : r; };

  TriMesh mesh;
  mesh.nodes.resize(2, static_cast<Eigen::Index>((na + 1) * (m + 1)));
  for (int k = 0; k <= na; ++k) {
    const double theta = 0.5 * std::numbers::pi * (1.0 + static_cast<double>(k) / na);
    Eigen::Vector2d inner(length + radius * std::cos(theta), radius * std::sin(theta));
    if (k == 0) inner = {length, radius};
    if (k == na) inner = {length - radius, 0.0};
    Eigen::Vector2d outer;
    if (k <= n) {
      outer = {length - length * static_cast<double>(k) / n, length};
    } else {
      outer = {0.0, length - length * static_cast<double>(k - n) / n};
    }
    if (k == na) outer = {0.0, 0.0};
    for (int j = 0; j <= m; ++j) {
      const double g = j == m ? 1.0 : grade(static_cast<double>(j) / m);
      Eigen::Vector2d p = inner + g * (outer - inner);
      // keep symmetry lines exact
      if (k == 0) p.x() = length;
      if (k == na) p.y() = 0.0;
      mesh.nodes.col(k * (m + 1) + j) = p;
    }
  }

  std::vector<Eigen::Vector3i> tris;
  tris.reserve(static_cast<size_t>(2 * na * m));
  for (int k = 0; k < na; ++k) {
    for (int j = 0; j < m; ++j) {
      const int p00 = k * (m + 1) + j;
      const int p10 = (k + 1) * (m + 1) + j;
      split_quad(mesh.nodes, p00, p10, p10 + 1, p00 + 1, tris);
    }
  }
  mesh.triangles = pack(tris);
  mesh.validate();
  return mesh;
}

TriMesh rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("rectangle mesh needs at least one division per side");
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("rectangle has no area");
  TriMesh mesh;
  mesh.nodes.resize(2, static_cast<Eigen::Index>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes.col(j * (nx + 1) + i) = Eigen::Vector2d(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny);
    }
  }
  std::vector<Eigen::Vector3i> tris;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int p00 = j * (nx + 1) + i;
      split_quad(mesh.nodes, p00, p00 + 1, p00 + nx + 2, p00 + nx + 1, tris);
    }
  }
  mesh.triangles = pack(tris);
  mesh.validate();
  return mesh;
}

}  // namespace pinncal::datagen
