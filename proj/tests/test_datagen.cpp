#include <cmath>
#include <numeric>
#include <set>

#include <doctest.h>

#include "pinncal/datagen/csv_io.hpp"
#include "pinncal/datagen/fem.hpp"
#include "pinncal/datagen/mesh.hpp"
#include "pinncal/datagen/noise.hpp"
#include "pinncal/datagen/rod.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/errors.hpp"

using namespace pinncal;
using namespace pinncal::datagen;

TEST_CASE("analytical rod field") {
  const RodCase rod{100.0, 100.0, 210000.0, 1.0};
  const auto x = linspace(0.0, 100.0, 5);
  const auto u = rod_analytical(rod, x);
  CHECK(u[0] == 0.0);
  CHECK(u[4] == doctest::Approx(100.0 * 100.0 / 210000.0));
  CHECK_THROWS_AS(rod_analytical(rod, Eigen::VectorXd::Constant(1, 101.0)), DomainError);
}

TEST_CASE("FEM patch test reproduces the linear field") {
  const mech::IsotropicElasticEnu mat{210000.0, 0.3};
  const double s = 100.0, a = 40.0, b = 25.0;
  const auto sol = fem_solve(uniaxial_rectangle_problem(a, b, 7, 5, mat, s));
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < sol.mesh.num_nodes(); ++i) {
    const double x = sol.mesh.nodes(0, i), y = sol.mesh.nodes(1, i);
    const double ux = s / mat.E * (x - a), uy = -mat.nu * s / mat.E * y;
    err = std::max({err, std::abs(sol.displacements(0, i) - ux), std::abs(sol.displacements(1, i) - uy)});
    scale = std::max(scale, std::abs(ux));
  }
  CHECK(err / scale < 1e-8);
  CHECK(sol.internal_work == doctest::Approx(sol.external_work).epsilon(1e-10));
  CHECK(sol.internal_work == doctest::Approx(0.5 * s * s / mat.E * a * b).epsilon(1e-10));
}

TEST_CASE("plate with a hole: strain level, work balance and refinement") {
  PlateCase plate;
  CHECK(plate.domain_area() == doctest::Approx(10000.0 - M_PI * 25.0));
  const auto sol = fem_solve_plate(plate);
  CHECK(sol.mesh.num_nodes() >= 8000);
  CHECK(sol.relative_residual < 1e-10);
  CHECK(sol.internal_work == doctest::Approx(sol.external_work).epsilon(1e-9));
  CHECK(100.0 * sol.max_strain == doctest::Approx(0.15).epsilon(0.05));
  CHECK(sol.mesh.area() == doctest::Approx(plate.domain_area()).epsilon(1e-3));

  // Energy converges from below as the mesh is refined.
  PlateCase coarse = plate;
  coarse.mesh.edge_divisions = 25;
  coarse.mesh.radial_divisions = 40;
  PlateCase mid = plate;
  mid.mesh.edge_divisions = 50;
  mid.mesh.radial_divisions = 80;
  const double w1 = fem_solve_plate(coarse).external_work, w2 = fem_solve_plate(mid).external_work;
  const double w3 = sol.external_work;
  CHECK(w1 < w2);
  CHECK(w2 < w3);
  CHECK(w3 - w2 < w2 - w1);
}

TEST_CASE("mesh validation rejects inverted elements") {
  auto mesh = rectangle_mesh(0, 0, 1, 1, 1, 1);
  mesh.validate();
  std::swap(mesh.triangles(1, 0), mesh.triangles(2, 0));
  CHECK_THROWS_AS(mesh.validate(), DataError);
}

TEST_CASE("plate sampling is deterministic, disjoint and area weighted") {
  PlateCase plate;
  plate.mesh.edge_divisions = 40;
  plate.mesh.radial_divisions = 64;
  const auto sol = fem_solve_plate(plate);
  PlateSampling ps;
  ps.n_data = 512;
  ps.n_collocation = 512;
  ps.n_validation = 256;
  ps.seed = 9;
  const auto a = sample_training_set(sol, sol.displacements, plate, ps);
  const auto b = sample_training_set(sol, sol.displacements, plate, ps);
  CHECK(a.set.data_points == b.set.data_points);
  CHECK(a.set.pde_points == a.set.data_points);
  CHECK(a.set.ext_points.cols() == 64);
  CHECK(a.set.volume == doctest::Approx(plate.domain_area()));
  CHECK(a.set.boundary_measure == doctest::Approx(plate.length * plate.thickness));
  std::set<std::pair<double, double>> train;
  for (int i = 0; i < a.set.data_points.cols(); ++i) train.insert({a.set.data_points(0, i), a.set.data_points(1, i)});
  CHECK(train.size() == 512u);
  for (int i = 0; i < a.validation_points.cols(); ++i) {
    CHECK(train.count({a.validation_points(0, i), a.validation_points(1, i)}) == 0);
  }
  ps.seed = 10;
  CHECK(sample_training_set(sol, sol.displacements, plate, ps).set.data_points != a.set.data_points);

  ps.mode = CollocationMode::kIndependent;
  ps.n_collocation = 300;
  const auto c = sample_training_set(sol, sol.displacements, plate, ps);
  CHECK(c.set.pde_points.cols() == 300);
  CHECK(c.set.work_points == c.set.pde_points);

  ps.n_data = sol.mesh.num_nodes();
  CHECK_THROWS_AS(sample_training_set(sol, sol.displacements, plate, ps), ConfigError);
}

TEST_CASE("PPS sampling draws distinct indices with the requested size") {
  std::mt19937_64 rng(1);
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(100, 1.0, 10.0);
  const auto idx = sample_pps(w, 30, rng);
  CHECK(idx.size() == 30u);
  CHECK(std::set<int>(idx.begin(), idx.end()).size() == 30u);
  // Heavier half is drawn more often on average.
  int heavy = 0, trials = 200;
  for (int t = 0; t < trials; ++t) {
    for (int i : sample_pps(w, 10, rng)) heavy += i >= 50;
  }
  CHECK(heavy > trials * 10 / 2);
}

TEST_CASE("gaussian noise has the requested spread and is seeded") {
  Eigen::MatrixXd clean = Eigen::MatrixXd::Constant(2, 20000, 0.01);
  const auto noisy = add_noise(clean, {1e-4, 5});
  const Eigen::ArrayXXd d = (noisy - clean).array();
  const double m = d.mean();
  const double sd = std::sqrt((d - m).square().sum() / (d.size() - 1));
  CHECK(std::abs(m) < 5e-6);
  CHECK(sd == doctest::Approx(1e-4).epsilon(0.02));
  CHECK(add_noise(clean, {1e-4, 5}) == noisy);
  CHECK(add_noise(clean, {0.0, 5}) == clean);
  CHECK_THROWS(add_noise(clean, {-1.0, 5}));
}

TEST_CASE("1D CSV round trip and ingestion errors") {
  Rod1DData d;
  d.x = linspace(0.0, 80.0, 5);
  d.u = d.x * (212.55 / 222700.0);
  d.traction = 212.55;
  d.length = 80.0;
  d.width = 19.25;
  const auto back = parse_1d_csv(format_1d_csv(d));
  CHECK(back.traction == 212.55);
  CHECK(back.length == 80.0);
  CHECK(back.width == 19.25);
  CHECK(back.x == d.x);
  CHECK((back.u - d.u).cwiseAbs().maxCoeff() < 1e-15);

  // A rigid offset is removed.
  const auto shifted = parse_1d_csv("# traction_Nmm2 = 10\nx_mm,u_mm\n0,0.5\n1,0.6\n2,0.7\n");
  CHECK(shifted.u[0] == 0.0);
  CHECK(shifted.u[2] == doctest::Approx(0.2));
  CHECK(shifted.length == 2.0);

  CHECK_THROWS_AS(parse_1d_csv("x_mm,u_mm\n0,0\n1,1\n"), DataError);
  CHECK_THROWS_AS(parse_1d_csv("# traction_Nmm2 = 10\nx_mm,u_mm\n0,0\n1,abc\n"), DataError);
  CHECK_THROWS_AS(parse_1d_csv("# traction_Nmm2 = 10\nx,y,z\n0,0,0\n"), DataError);

  const auto ts = rod_csv_training_set(back);
  CHECK(ts.data_points.cols() == 5);
  CHECK(ts.ext_points.cols() == 2);
}

TEST_CASE("shipped specimen data parses") {
  const auto d = ingest_1d_csv(std::filesystem::path(PINNCAL_SOURCE_DIR) / "configs/data/specimen_synthetic.csv");
  CHECK(d.x.size() == 161);
  CHECK(d.length == 80.0);
  CHECK(d.traction == 212.55);
}
