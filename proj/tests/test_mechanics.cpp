#include <cmath>

#include <doctest.h>

#include "pinncal/errors.hpp"
#include "pinncal/mechanics.hpp"

using namespace pinncal;
using namespace pinncal::mech;

TEST_CASE("E, nu and K, G convert both ways") {
  for (double nu : {-0.5, 0.0, 0.2, 0.3, 0.45, 0.499}) {
    const IsotropicElasticEnu m{210000.0, nu};
    const auto kg = to_KG(m);
    CHECK(kg.K == doctest::Approx(m.E / (3 * (1 - 2 * nu))).epsilon(1e-14));
    CHECK(kg.G == doctest::Approx(m.E / (2 * (1 + nu))).epsilon(1e-14));
    const auto back = to_Enu(kg);
    CHECK(std::abs(back.E - m.E) / m.E < 1e-12);
    CHECK(std::abs(back.nu - nu) < 1e-12);
  }
  const auto steel = to_KG({210000.0, 0.3});
  CHECK(steel.K == doctest::Approx(175000.0));
  CHECK(steel.G == doctest::Approx(80769.2307692));
  CHECK_THROWS_AS(to_KG({210000.0, 0.5}), DomainError);
  CHECK_THROWS_AS(to_KG({-1.0, 0.3}), DomainError);
}

TEST_CASE("plane stress in K, G equals plane stress in E, nu") {
  const IsotropicElasticEnu m{210000.0, 0.3};
  for (const Strain2D<double> e : {Strain2D<double>{1e-3, -3e-4, 2e-4}, Strain2D<double>{0, 0, 5e-4}}) {
    const auto a = stress_2d_plane_stress(m, e);
    const auto b = stress_2d_KG(to_KG(m), e, Ambient::kPlaneStress);
    CHECK(a.xx == doctest::Approx(b.xx).epsilon(1e-12));
    CHECK(a.yy == doctest::Approx(b.yy).epsilon(1e-12));
    CHECK(a.xy == doctest::Approx(b.xy).epsilon(1e-12));
  }
  // uniaxial stress: eps = (s/E, -nu s/E)
  const double s = 100.0;
  const auto u = stress_2d_plane_stress(m, {s / m.E, -m.nu * s / m.E, 0.0});
  CHECK(u.xx == doctest::Approx(s));
  CHECK(std::abs(u.yy) < 1e-10);
  // pure shear
  const auto sh = stress_2d_KG(to_KG(m), {0.0, 0.0, 1e-3}, Ambient::kPlaneStrain);
  CHECK(sh.xy == doctest::Approx(2 * to_KG(m).G * 1e-3));
}

TEST_CASE("stress divergence of a quadratic field") {
  // u_x = a x^2, u_y = b x y
  const double a = 1e-4, b = -2e-5;
  Hessian2D<double> h{};
  h[0][0][0] = 2 * a;
  h[1][0][1] = b;
  h[1][1][0] = b;
  const auto lame = lame_from_KG(175000.0, 80769.23, Ambient::kPlaneStress);
  const auto d = divergence(lame, h);
  CHECK(d[0] == doctest::Approx((lame.lambda + 2 * lame.mu) * 2 * a + lame.lambda * b + lame.mu * b));
  CHECK(d[1] == doctest::Approx(0.0));
}

TEST_CASE("correction factors scale the estimates") {
  MaterialParameterization p{{"K", "G"}, {175000.0, 80000.0}};
  const std::vector<double> alpha{0.1, -0.5};
  const auto eff = effective_parameters(p, alpha);
  CHECK(eff[0] == doctest::Approx(192500.0));
  CHECK(eff[1] == doctest::Approx(40000.0));
  CHECK(feasible(p, eff));
  const std::vector<double> bad{1.0, 0.0};
  CHECK_FALSE(feasible(p, effective_parameters(p, std::vector<double>{-1.0, 0.0})));
  CHECK_FALSE(feasible(p, bad));
}

TEST_CASE("pairwise sum is exact on integers") {
  std::vector<double> v(1001);
  for (size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 500500.0);
}
