#include <cmath>
#include <random>

#include <doctest.h>

#include "pinncal/autodiff/dual_bundle.hpp"
#include "pinncal/autodiff/tape.hpp"

using namespace pinncal::ad;

TEST_CASE("dual bundle tanh carries exact first and second derivatives") {
  // f(x, y) = tanh(x * y + x)
  const double x = 0.3, y = -0.7;
  const DualBundle bx = DualBundle::variable(x, 0, 2);
  const DualBundle by = DualBundle::variable(y, 1, 2);
  const DualBundle f = tanh(bx * by + bx);
  const double z = x * y + x;
  const double t = std::tanh(z), t1 = 1 - t * t, t2 = -2 * t * t1;
  const double zx = y + 1, zy = x;
  CHECK(f.value == doctest::Approx(t).epsilon(1e-15));
  CHECK(f.first[0] == doctest::Approx(t1 * zx).epsilon(1e-14));
  CHECK(f.first[1] == doctest::Approx(t1 * zy).epsilon(1e-14));
  CHECK(f.second(0, 0) == doctest::Approx(t2 * zx * zx).epsilon(1e-14));
  CHECK(f.second(0, 1) == doctest::Approx(t2 * zx * zy + t1).epsilon(1e-14));
  CHECK(f.second(1, 0) == doctest::Approx(f.second(0, 1)).epsilon(1e-15));
  CHECK(f.second(1, 1) == doctest::Approx(t2 * zy * zy).epsilon(1e-14));
}

TEST_CASE("tape gradient matches central differences") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::vector<double> p(3 * 2 + 3);
  for (double& v : p) v = 0.5 * n01(rng);
  Eigen::MatrixXd x(2, 5);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);

  auto loss = [&](const std::vector<double>& params, Eigen::VectorXd* grad) {
    Tape tape(static_cast<int>(params.size()));
    Var W = tape.parameter(params, 0, 3, 2);
    Var b = tape.parameter(params, 6, 3, 1);
    Var h = tape.tanh(tape.affine(W, tape.constant(x), b, 5));
    Var l = mean(square(h) * 3.0 - h / (h * h + 2.0)) + sum(h) * 0.1;
    if (grad) *grad = tape.gradient(l);
    return l.scalar();
  };
  Eigen::VectorXd g;
  loss(p, &g);
  for (size_t k = 0; k < p.size(); ++k) {
    auto pp = p, pm = p;
    const double h = 1e-6;
    pp[k] += h;
    pm[k] -= h;
    const double fd = (loss(pp, nullptr) - loss(pm, nullptr)) / (2 * h);
    CHECK(std::abs(fd - g[static_cast<Eigen::Index>(k)]) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("tape replay reproduces a fresh recording") {
  std::vector<double> p{0.1, -0.4, 0.25};
  Tape tape(3);
  Var a = tape.parameter(p, 0, 1, 3);
  Var l = sum(tanh(a) * a);
  std::vector<double> q{0.7, 0.2, -1.1};
  tape.replay(q);
  double ref = 0.0;
  for (double v : q) ref += std::tanh(v) * v;
  CHECK(l.scalar() == doctest::Approx(ref).epsilon(1e-14));
}

TEST_CASE("jet layout indexes symmetric second derivatives once") {
  JetLayout L{2, 2, 10};
  CHECK(L.components() == 6);
  CHECK(L.second(0, 1) == L.second(1, 0));
  CHECK(L.second(0, 0) == 3);
  CHECK(L.second(1, 1) == 5);
}
