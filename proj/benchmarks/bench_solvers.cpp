#include <algorithm>

#include <benchmark/benchmark.h>

#include "latres/dtn.hpp"
#include "latres/guided_modes.hpp"
#include "latres/timedomain.hpp"

namespace {

using namespace latres;

StructureParams fixture() {
  StructureParams p;
  p.N = 2;
  p.masses = {2.0, 1.0};
  p.springs = {1.0, 1.0};
  p.gammas = {1.0, 7.0};
  return p;
}

void BM_FourierSolve(benchmark::State& state) {
  const auto p = fixture();
  const auto pt = BlochPoint::real(0.1, 1.0);
  const auto inc = IncidentField::unit_left(classify_harmonics(p, pt));
  for (auto _ : state) benchmark::DoNotOptimize(solve_scattering(p, pt, inc));
}
BENCHMARK(BM_FourierSolve);

void BM_TruncatedSolve(benchmark::State& state) {
  const auto p = fixture();
  const auto pt = BlochPoint::real(0.1, 1.0);
  const auto inc = IncidentField::unit_left(classify_harmonics(p, pt));
  for (auto _ : state) benchmark::DoNotOptimize(solve_truncated(p, pt, inc, state.range(0)));
}
BENCHMARK(BM_TruncatedSolve)->Arg(5)->Arg(25)->Arg(100);

// One row of a sigma_min search grid.
void BM_SigmaMinRow(benchmark::State& state) {
  const auto p = fixture();
  for (auto _ : state) {
    double low = 1.0;
    for (int j = 0; j < 200; ++j)
      low = std::min(low, sigma_min(p, BlochPoint::real(0.06, 0.2 + 0.01 * j)));
    benchmark::DoNotOptimize(low);
  }
}
BENCHMARK(BM_SigmaMinRow);

void BM_RK4Steps(benchmark::State& state) {
  const auto p = fixture();
  const double dt = 0.02 / omega_norm_bound(p);
  const auto init = symmetric_pulse(p.N, state.range(0), 0.1, 2.5);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(p, init, dt, 100));
}
BENCHMARK(BM_RK4Steps)->Arg(60)->Arg(240);

}  // namespace

BENCHMARK_MAIN();
