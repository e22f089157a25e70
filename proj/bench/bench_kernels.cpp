// Serial reference vs OpenMP path for the data-parallel kernels. Both paths
// return identical results; only wall time differs. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include "slicing/construction.hpp"
#include "slicing/density.hpp"
#include "slicing/geometry.hpp"
#include "slicing/polytope.hpp"

namespace {

using namespace slicing;

Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Exec::serial : Exec::parallel;
}

Construction sample_construction(int n, int N) {
  Rng rng(1);
  Eigen::MatrixXd pts(N, n);
  for (int i = 0; i < N; ++i) pts.row(i) = sample_sphere(n, rng).transpose();
  return build_construction(n, pts);
}

void BM_VolumeEstimate(benchmark::State& state) {
  const Construction c = sample_construction(8, 512);
  VolumeOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) {
    Rng rng(2);
    benchmark::DoNotOptimize(volume_estimate(c.body, rng, 10000, 1.0, opts));
  }
}
BENCHMARK(BM_VolumeEstimate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MassInSet(benchmark::State& state) {
  const Construction c = sample_construction(8, 512);
  for (auto _ : state) {
    Rng rng(3);
    benchmark::DoNotOptimize(mass_in_set(
        c.density, [&](const Eigen::VectorXd& x) { return contains(c.body, x, 3.0); }, rng,
        10000, exec_of(state)));
  }
}
BENCHMARK(BM_MassInSet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GaussianTail(benchmark::State& state) {
  for (auto _ : state) {
    Rng rng(4);
    benchmark::DoNotOptimize(gaussian_tail_check(12, rng, 100000, exec_of(state)));
  }
}
BENCHMARK(BM_GaussianTail)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildNet(benchmark::State& state) {
  NetOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(build_net(6, 1, 0.5, rng, 10000, 1000, opts));
  }
}
BENCHMARK(BM_BuildNet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FindGoodPoints(benchmark::State& state) {
  ConstructionParams p;
  p.n = 8;
  p.k = 1;
  p.points = 4096;
  p.delta = 0.5;
  Rng net_rng(6);
  const GrassmannNet net = build_net(8, 1, 0.5, net_rng, 10000, 1000);
  for (auto _ : state) {
    Rng rng(7);
    benchmark::DoNotOptimize(find_good_points(p, net, rng, exec_of(state)));
  }
}
BENCHMARK(BM_FindGoodPoints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MaxSectionSearch(benchmark::State& state) {
  const Construction c = sample_construction(10, 2048);
  auto objective = [&](const Subspace& F) { return section_integral(c.density, F); };
  for (auto _ : state) {
    Rng rng(8);
    benchmark::DoNotOptimize(
        max_section_search(objective, 10, 2, 8, 300, rng, nullptr, exec_of(state)));
  }
}
BENCHMARK(BM_MaxSectionSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
