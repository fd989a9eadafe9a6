// Serial reference against the OpenMP kernels on the hot paths of one step.
// The range argument selects the execution policy: 0 serial, 1 parallel.

#include "siw/diagnostics.hpp"
#include "siw/geometry.hpp"
#include "siw/nonlinear.hpp"
#include "siw/stability.hpp"
#include "siw/stokes.hpp"
#include "siw/timestepper.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace siw;

namespace {

Exec policy(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

FluidParams params() {
  FluidParams p;
  p.rho_plus = 1.0;
  p.rho_minus = 2.0;
  p.mu_plus = 1.5;
  p.mu_minus = 0.7;
  p.sigma_plus = 1.0;
  p.sigma_minus = 1.5;
  return p;
}

GridPtr grid() { return Grid::make(1.0, 1.0, 16, 16, 24, 24, 1.0); }

// a few linear steps from perturbed surfaces, so every field is populated
State moving(const GridPtr& g) {
  State s = zero_state(g);
  s.eta_plus = SurfaceField::cosine(g, 1, 0, 1e-3) + SurfaceField::cosine(g, 2, 1, 5e-4);
  s.eta_minus = SurfaceField::cosine(g, 0, 1, 1e-3) + SurfaceField::cosine(g, 1, 2, 5e-4);
  const LinearStepper step(g, params(), 1e-3, Mode::SurfaceTension, Exec::Serial);
  for (int k = 0; k < 3; ++k) s = step.step(s, LinearForcing{});
  return s;
}

void BM_transform(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  for (auto _ : st) {
    const Vol v = s.u[2].physical(policy(st));
    benchmark::DoNotOptimize(LayeredField::from_physical(g, v, Jump::Continuous, true, policy(st)));
  }
}

void BM_geometry(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  for (auto _ : st)
    benchmark::DoNotOptimize(build_geometry(s.eta_plus, s.eta_minus, s.eta_plus, s.eta_minus, params(),
                                            default_extension(), policy(st)));
}

void BM_forcing(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  const GeometryCache c =
      build_geometry(s.eta_plus, s.eta_minus, s.eta_plus, s.eta_minus, params(), default_extension());
  for (auto _ : st) {
    benchmark::DoNotOptimize(forcing_f(s.u, s.p, c, params(), policy(st)));
    benchmark::DoNotOptimize(forcing_g(s.u, c, params(), policy(st)));
  }
}

void BM_stokes(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  StokesData d;
  d.F1 = {s.u[0], s.u[1], s.u[2]};
  d.F3plus = {s.eta_plus, s.eta_minus, s.eta_plus};
  d.F3minus = {s.eta_minus, s.eta_plus, s.eta_minus};
  for (auto _ : st) benchmark::DoNotOptimize(solve_two_phase_stokes(g, d, params(), policy(st)));
}

void BM_nonlinear_step(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  NonlinearOptions o;
  o.exec = policy(st);
  const NonlinearStepper step(g, params(), 1e-3, Mode::SurfaceTension, o);
  for (auto _ : st) benchmark::DoNotOptimize(step.step(s));
}

void BM_report(benchmark::State& st) {
  const GridPtr g = grid();
  const State s = moving(g);
  for (auto _ : st) benchmark::DoNotOptimize(evaluate_report(s, params(), Mode::SurfaceTension, policy(st)));
}

void BM_stability(benchmark::State& st) {
  FluidParams p = params();
  std::swap(p.rho_plus, p.rho_minus);
  RateOptions o;
  o.nz = 16;
  for (auto _ : st)
    benchmark::DoNotOptimize(stability_report(p, mode_set(2), RateMethod::Dense, o, 1e-8, policy(st)));
}

}  // namespace

BENCHMARK(BM_transform)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_geometry)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_forcing)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stokes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nonlinear_step)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_report)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_stability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
