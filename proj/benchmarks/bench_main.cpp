// Loss evaluation and FE solve timings.

#include <benchmark/benchmark.h>

#include "pinncal/datagen/fem.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/loss.hpp"
#include "pinncal/network.hpp"

using namespace pinncal;

namespace {

datagen::PlateCase plate_case(int edge, int radial) {
  datagen::PlateCase p;
  p.mesh.edge_divisions = edge;
  p.mesh.radial_divisions = radial;
  return p;
}

void BM_PlateLossAndGradient(benchmark::State& state) {
  static const auto plate = plate_case(100, 160);
  static const auto sol = datagen::fem_solve_plate(plate);
  datagen::PlateSampling ps;
  ps.n_data = ps.n_collocation = static_cast<int>(state.range(0));
  ps.n_validation = 16;
  const auto sc = datagen::sample_training_set(sol, sol.displacements, plate, ps);
  std::vector<int> sizes{2, 16, 16, 1};
  std::vector<NormalizedNetwork> nets;
  for (int c = 0; c < 2; ++c) {
    nets.push_back({glorot_normal_init(sizes, static_cast<std::uint64_t>(c)),
                    NormalizationSpec::from_data(sc.set.data_points, sc.set.data_values.row(c))});
  }
  const auto kg = mech::to_KG({210000.0, 0.3});
  LossEvaluator ev(nets, {{{"K", "G"}, {kg.K, kg.G}}, true}, sc.set, {});
  auto x = ev.initial_parameters();
  Eigen::VectorXd g;
  for (auto _ : state) {
    x[0] += 1e-9;  // defeat the last-point cache
    benchmark::DoNotOptimize(ev(x, g));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PlateLossAndGradient)->Arg(512)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_RodLossAndGradient(benchmark::State& state) {
  const auto sc = datagen::rod_training_set({100.0, 100.0, 210000.0, 1.0}, 128, 16);
  std::vector<int> sizes{1, 8, 8, 1};
  std::vector<NormalizedNetwork> nets{
      {glorot_normal_init(sizes, 0), NormalizationSpec::from_data(sc.set.data_points, sc.set.data_values)}};
  LossEvaluator ev(nets, {{{"E"}, {210000.0}}, true}, sc.set, {});
  auto x = ev.initial_parameters();
  Eigen::VectorXd g;
  for (auto _ : state) {
    x[0] += 1e-9;
    benchmark::DoNotOptimize(ev(x, g));
  }
}
BENCHMARK(BM_RodLossAndGradient)->Unit(benchmark::kMicrosecond);

void BM_PointEvaluation(benchmark::State& state) {
  std::vector<int> sizes{2, 16, 16, 1};
  NormalizedNetwork nn{glorot_normal_init(sizes, 1), NormalizationSpec::identity(2, 1)};
  const std::array<double, 2> x{0.2, -0.4};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(nn, x));
}
BENCHMARK(BM_PointEvaluation);

void BM_PlateFemSolve(benchmark::State& state) {
  const auto plate = plate_case(static_cast<int>(state.range(0)), static_cast<int>(state.range(0) * 8 / 5));
  for (auto _ : state) benchmark::DoNotOptimize(datagen::fem_solve_plate(plate));
}
BENCHMARK(BM_PlateFemSolve)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
