#include <benchmark/benchmark.h>

#include "ionwave/constraint.hpp"
#include "ionwave/trap_model.hpp"

namespace {

ionwave::TrapModel makeTrap() {
  ionwave::SpatialGrid g;
  g.spacing = Eigen::Vector3d::Constant(5e-6);
  g.origin = Eigen::Vector3d(-50e-6, -50e-6, -200e-6);
  g.dims = Eigen::Vector3i(21, 21, 81);
  ionwave::LinearTrapParams p;
  return ionwave::synthLinearTrap(p, g);
}

void BM_FieldSample(benchmark::State& state) {
  const auto model = makeTrap();
  const Eigen::VectorXd v = Eigen::VectorXd::Constant(model.numElectrodes(), 1.0);
  Eigen::Vector3d r(1e-6, -2e-6, 13e-6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.totalSample(v, r));
  }
}
BENCHMARK(BM_FieldSample);

void BM_SolveStep(benchmark::State& state) {
  const auto model = makeTrap();
  ionwave::ConstraintSpec spec;
  spec.r0 = {0.0, 0.0, 10e-6};
  spec.omega_z = ionwave::kTwoPi * 3.6e6;
  spec.axis_xz = spec.axis_yz = true;
  const auto sys = ionwave::assemble(spec, model);
  const ionwave::SolverOptions opts;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ionwave::solve(sys, opts));
  }
}
BENCHMARK(BM_SolveStep);

}  // namespace

BENCHMARK_MAIN();
