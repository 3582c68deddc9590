#pragma once

#include <Eigen/Core>

namespace pinncal::datagen {

/// Linear triangle mesh, counter-clockwise connectivity.
struct TriMesh {
  Eigen::Matrix2Xd nodes;
  Eigen::Matrix3Xi triangles;

  int num_nodes() const { return static_cast<int>(nodes.cols()); }
  int num_elements() const { return static_cast<int>(triangles.cols()); }

  double element_area(int e) const;
  double area() const;
  /// One third of the adjacent triangle areas per node.
  Eigen::VectorXd lumped_areas() const;

  /// Throws DataError on bad indices or non-positive element areas.
  void validate() const;
};

/// Structured mesh of the square [0, L]^2 minus the quarter disk of radius R
/// centred at (L, 0). Rays run from the hole to the outer edges; `grading`
/// clusters rings towards the hole. Doubling both division counts nests the
/// previous node set.
struct PlateMeshOptions {
  /// Divisions along each of the two loaded/free outer edges.
  int edge_divisions = 100;
  int radial_divisions = 160;
  double grading = 2.0;

  void validate() const;
};

TriMesh plate_with_hole_mesh(double length, double radius, const PlateMeshOptions& options);

/// Axis-aligned rectangle split into nx x ny quads, two triangles each.
TriMesh rectangle_mesh(double x0, double y0, double x1, double y1, int nx, int ny);

}  // namespace pinncal::datagen
