#include <cmath>

#include <doctest.h>

#include "pinncal/errors.hpp"
#include "pinncal/network.hpp"

using namespace pinncal;

namespace {

NormalizedNetwork sample_net(std::vector<int> sizes, std::uint64_t seed) {
  NormalizedNetwork nn{glorot_normal_init(sizes, seed), {}};
  nn.spec.x_min = Eigen::VectorXd::Constant(sizes.front(), 0.0);
  nn.spec.x_max = Eigen::VectorXd::Constant(sizes.front(), 100.0);
  nn.spec.u_min = Eigen::VectorXd::Constant(sizes.back(), -0.05);
  nn.spec.u_max = Eigen::VectorXd::Constant(sizes.back(), 0.01);
  return nn;
}

}  // namespace

TEST_CASE("glorot init is deterministic and biases start at zero") {
  std::vector<int> sizes{2, 16, 16, 1};
  auto a = glorot_normal_init(sizes, 3), b = glorot_normal_init(sizes, 3), c = glorot_normal_init(sizes, 4);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  CHECK(a.num_parameters() == 2 * 16 + 16 + 16 * 16 + 16 + 16 + 1);
  for (const auto& bias : a.biases) CHECK(bias.isZero());
}

TEST_CASE("parameter flattening round trips") {
  std::vector<int> sizes{1, 8, 8, 1};
  auto net = glorot_normal_init(sizes, 1);
  auto flat = net.parameters();
  auto other = make_network(sizes);
  other.set_parameters(flat);
  CHECK(other.parameters() == flat);
  const double x = 0.3;
  CHECK(net(std::span<const double>(&x, 1))[0] == other(std::span<const double>(&x, 1))[0]);
}

TEST_CASE("normalization maps the training range onto [-1, 1]") {
  Eigen::MatrixXd pts(1, 3), vals(1, 3);
  pts << 0.0, 50.0, 100.0;
  vals << 0.0, 0.01, 0.02;
  auto spec = NormalizationSpec::from_data(pts, vals);
  const double lo = 0.0, hi = 100.0;
  CHECK(transform_in(std::span<const double>(&lo, 1), spec)[0] == doctest::Approx(-1.0));
  CHECK(transform_in(std::span<const double>(&hi, 1), spec)[0] == doctest::Approx(1.0));
  const double one = 1.0;
  CHECK(transform_out(std::span<const double>(&one, 1), spec)[0] == doctest::Approx(0.02));
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(1, 3, 0.5);
  CHECK_THROWS_AS(NormalizationSpec::from_data(flat, vals).validate(), ConfigError);
}

TEST_CASE("normalized network derivatives agree with finite differences") {
  auto nn = sample_net({2, 16, 16, 1}, 11);
  const std::array<double, 2> x{37.0, 61.0};
  const auto ev = evaluate(nn, x);
  const auto& d = ev.derivatives[0];
  auto value = [&](double a, double b) {
    const std::array<double, 2> p{a, b};
    return evaluate(nn, p).u[0];
  };
  auto grad = [&](double a, double b, int i) {
    const std::array<double, 2> p{a, b};
    return evaluate(nn, p).derivatives[0].first[i];
  };
  const double h = 1e-3;
  for (int i = 0; i < 2; ++i) {
    const double dx = i == 0 ? h : 0.0, dy = i == 1 ? h : 0.0;
    const double fd1 = (value(x[0] + dx, x[1] + dy) - value(x[0] - dx, x[1] - dy)) / (2 * h);
    CHECK(std::abs(fd1 - d.first[i]) <= 1e-6 * std::max(1e-3, std::abs(d.first[i])) + 1e-12);
    for (int j = 0; j < 2; ++j) {
      const double fd2 = (grad(x[0] + dx, x[1] + dy, j) - grad(x[0] - dx, x[1] - dy, j)) / (2 * h);
      CHECK(std::abs(fd2 - d.second(j, i)) <= 1e-4 * std::max(1e-5, std::abs(d.second(j, i))));
    }
  }
}

TEST_CASE("batched field jets reproduce point evaluation") {
  auto nn = sample_net({2, 8, 8, 1}, 5);
  Eigen::MatrixXd pts(2, 3);
  pts << 10, 50, 90, 5, 40, 95;
  auto params = nn.net.parameters();
  ad::Tape tape(static_cast<int>(params.size()));
  auto jets = record_field_jets(tape, nn, params, 0, pts, 2);
  for (int p = 0; p < 3; ++p) {
    const std::array<double, 2> x{pts(0, p), pts(1, p)};
    const auto ev = evaluate(nn, x);
    CHECK(jets[0].value.value()(0, p) == doctest::Approx(ev.u[0]).epsilon(1e-12));
    CHECK(jets[0].first[1].value()(0, p) == doctest::Approx(ev.derivatives[0].first[1]).epsilon(1e-12));
    CHECK(jets[0].second[0][1].value()(0, p) == doctest::Approx(ev.derivatives[0].second(0, 1)).epsilon(1e-10));
  }
}

TEST_CASE("points outside the normalization range are flagged") {
  auto nn = sample_net({1, 4, 1}, 2);
  const double inside = 50.0, outside = 120.0;
  CHECK_FALSE(evaluate(nn, std::span<const double>(&inside, 1)).extrapolated);
  CHECK(evaluate(nn, std::span<const double>(&outside, 1)).extrapolated);
}
