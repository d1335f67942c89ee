#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "rtdcm/curve_geometry.hpp"
#include "rtdcm/measurement.hpp"
#include "rtdcm/optimize.hpp"
#include "rtdcm/rod_model.hpp"

using namespace rtdcm;

namespace {

ActuationState twisted(double tendon) {
  std::vector<double> a(9, 0.0);
  a[4] = -70;
  return ActuationState(tendon, a);
}

void BM_EnergyAndGradient(benchmark::State& state) {
  const ManipulatorConfig cfg;
  const auto act = twisted(100);
  const auto report = solve_equilibrium(cfg, act);
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_energy(report.dof, cfg, act));
    benchmark::DoNotOptimize(energy_gradient(report.dof, cfg, act));
  }
}
BENCHMARK(BM_EnergyAndGradient);

void BM_SolveEquilibrium(benchmark::State& state) {
  const ManipulatorConfig cfg;
  const auto act = twisted(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(cfg, act));
}
BENCHMARK(BM_SolveEquilibrium)->Arg(40)->Arg(100)->Arg(140)->Unit(benchmark::kMillisecond);

void BM_SmoothedProfile(benchmark::State& state) {
  const Shape s = forward(ManipulatorConfig{}, twisted(100));
  for (auto _ : state) benchmark::DoNotOptimize(smooth_profile(ct_profile(s.dense_curve)));
}
BENCHMARK(BM_SmoothedProfile)->Unit(benchmark::kMicrosecond);

void BM_Dbscan(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  std::vector<Vec3> pts;
  for (int b = 0; b < 9; ++b) {
    for (int k = 0; k < state.range(0); ++k) pts.emplace_back(n(rng), n(rng), -70.0 * b + n(rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(pts, 5.0, 4));
}
BENCHMARK(BM_Dbscan)->Arg(10)->Arg(30)->Arg(100);

void BM_GoldenSection(benchmark::State& state) {
  GoldenSearchSpec spec;
  spec.lo = 0;
  spec.hi = 90;
  spec.tol = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(golden_section([](double x) { return std::cos(x / 30.0) + x * 1e-3; }, spec));
  }
}
BENCHMARK(BM_GoldenSection);

}  // namespace

BENCHMARK_MAIN();
