#include <doctest.h>

#include "oracles.hpp"
#include "siw/timestepper.hpp"

using namespace siw;

namespace {

GridPtr grid(int N = 6, int nz = 10) { return Grid::make(1.0, 1.0, N, N, nz, nz, 1.0); }

State perturbed(const GridPtr& g, double eps) {
  State s = zero_state(g);
  s.eta_plus = SurfaceField::cosine(g, 1, 0, eps);
  s.eta_minus = SurfaceField::cosine(g, 0, 1, eps);
  return s;
}

double state_gap(const State& a, const State& b) {
  double m = (a.eta_plus - b.eta_plus).coeffs().abs().maxCoeff();
  m = std::max(m, (a.eta_minus - b.eta_minus).coeffs().abs().maxCoeff());
  for (int i = 0; i < 3; ++i) m = std::max(m, (a.u[i] - b.u[i]).max_abs());
  return m;
}

double max_divergence(const VectorField& u) {
  const GridPtr& g = u[0].grid();
  Vol div = vol_constant(*g, 0.0);
  for (int i = 0; i < 3; ++i) div += SpectralView(g, u[i].physical()).d(i);
  return div.max_abs();
}

}  // namespace

TEST_CASE("the equilibrium is a fixed point") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::light_over_heavy();
  for (Mode mode : {Mode::SurfaceTension, Mode::NoSurfaceTension}) {
    State s = zero_state(g);
    const NonlinearStepper step(g, prm, 1e-2, mode);
    for (int k = 0; k < 3; ++k) s = step.step(s);
    CHECK(state_gap(s, zero_state(g)) == 0.0);
    CHECK(s.p.max_abs() == 0.0);
    CHECK(s.step == 3);
    CHECK(s.t == doctest::Approx(3e-2));
  }
}

TEST_CASE("a raised crest starts to fall and the base energy decreases") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::light_over_heavy();
  State s = zero_state(g);
  s.eta_plus = SurfaceField::cosine(g, 1, 0, 1e-2);
  const LinearStepper step(g, prm, 1e-2, Mode::SurfaceTension);
  double last = base_energy(s, prm, true);
  for (int k = 0; k < 20; ++k) {
    s = step.step(s, LinearForcing{});
    const double e = base_energy(s, prm, true);
    CHECK(e < last);
    last = e;
  }
  // crest at x1 = 0: vertical velocity at the top is downward there
  CHECK(s.u[2].trace_top().physical()[0] < 0.0);
}

TEST_CASE("backward Euler is first order in time") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  auto final_state = [&](double dt) {
    State s = perturbed(g, 1e-2);
    const LinearStepper step(g, prm, dt, Mode::SurfaceTension);
    for (long k = 0; k < std::lround(0.2 / dt); ++k) s = step.step(s, LinearForcing{});
    return s;
  };
  const State a = final_state(2e-2), b = final_state(1e-2), c = final_state(5e-3), d = final_state(2.5e-3);
  const double e1 = state_gap(a, b), e2 = state_gap(b, c), e3 = state_gap(c, d);
  CHECK(std::log2(e1 / e2) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::log2(e2 / e3) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("linear steps keep the velocity divergence free and the mean elevation fixed") {
  const GridPtr g = grid(8, 12);
  const FluidParams prm = oracle::uneven();
  std::mt19937_64 rng(4);
  State s = zero_state(g);
  s.eta_plus = oracle::random_surface(g, 2, 1e-2, rng);
  s.eta_minus = oracle::random_surface(g, 2, 1e-2, rng);
  const LinearStepper step(g, prm, 5e-3, Mode::SurfaceTension);
  for (int k = 0; k < 5; ++k) {
    s = step.step(s, LinearForcing{});
    CHECK(max_divergence(s.u) < 1e-8 * std::max(1e-300, max_abs(s.u)) + 1e-15);
  }
  CHECK(s.eta_plus[g->mode_index(0, 0)] == cplx(0.0));
  CHECK(s.eta_minus[g->mode_index(0, 0)] == cplx(0.0));
}

TEST_CASE("nonlinear steps keep the zero mode and approach the linear step at small amplitude") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  for (Mode mode : {Mode::SurfaceTension, Mode::NoSurfaceTension}) {
    // start from a moving state; from rest the first nonlinear terms are cubic
    auto gap = [&](double eps) {
      const State s = LinearStepper(g, prm, 1e-2, mode).step(perturbed(g, eps), LinearForcing{});
      const State nl = NonlinearStepper(g, prm, 1e-2, mode).step(s);
      CHECK(nl.eta_plus[g->mode_index(0, 0)] == cplx(0.0));
      CHECK(nl.eta_minus[g->mode_index(0, 0)] == cplx(0.0));
      const State lin = LinearStepper(g, prm, 1e-2, mode).step(s, LinearForcing{});
      return state_gap(nl, lin);
    };
    const double a = gap(1e-2), b = gap(5e-3);
    CHECK(std::log2(a / b) == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("the corrector without surface tension settles") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  const NonlinearStepper step(g, prm, 1e-2, Mode::NoSurfaceTension);
  State s = perturbed(g, 1e-2);
  for (int k = 0; k < 3; ++k) {
    s = step.step(s);
    CHECK(step.last_corrections() >= 1);
    CHECK(step.last_corrections() < 30);
  }
  REQUIRE(s.forcing.has_value());
  CHECK(s.forcing->mode == Mode::NoSurfaceTension);
}

TEST_CASE("run: cadence, t_end = 0 and invalid steps") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::light_over_heavy();
  RunOptions o;
  o.dt = 1e-2;
  o.linear = true;

  SUBCASE("t_end = 0 gives only the initial report") {
    o.t_end = 0.0;
    const RunResult r = run(perturbed(g, 1e-2), o, prm);
    CHECK(r.reports.size() == 1);
    CHECK(r.final.step == 0);
    CHECK_FALSE(r.aborted);
  }
  SUBCASE("reports every k steps plus the last one") {
    o.t_end = 0.07;
    o.diagnostics_every = 3;
    std::vector<long> steps;
    RunObserver obs;
    obs.on_report = [&](const State& s, const EnergyReport&) { steps.push_back(s.step); };
    const RunResult r = run(perturbed(g, 1e-2), o, prm, obs);
    CHECK(steps == std::vector<long>{0, 3, 6, 7});
    CHECK(r.final.t == doctest::Approx(0.07));
  }
  SUBCASE("snapshots on their own cadence") {
    o.t_end = 0.06;
    o.snapshot_every = 2;
    std::vector<long> steps;
    RunObserver obs;
    obs.on_snapshot = [&](const State& s) { steps.push_back(s.step); };
    run(perturbed(g, 1e-2), o, prm, obs);
    CHECK(steps == std::vector<long>{2, 4, 6});
  }
  SUBCASE("non-positive dt") {
    o.dt = 0.0;
    CHECK_THROWS_AS(run(perturbed(g, 1e-2), o, prm), InvalidArgument);
    o.dt = -1e-3;
    CHECK_THROWS_AS(run(perturbed(g, 1e-2), o, prm), InvalidArgument);
  }
}

TEST_CASE("run aborts on a folded map and hands back the last good state") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::light_over_heavy();
  RunOptions o;
  o.dt = 1e-2;
  o.t_end = 0.1;
  o.mode = Mode::NoSurfaceTension;
  State s = zero_state(g);
  s.eta_minus = SurfaceField::cosine(g, 1, 0, 0.4);
  std::vector<long> snaps;
  RunObserver obs;
  obs.on_snapshot = [&](const State& st) { snaps.push_back(st.step); };
  const RunResult r = run(s, o, prm, obs);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("diffeomorphism") != std::string::npos);
  CHECK(snaps == std::vector<long>{0});
  CHECK(r.final.step == 0);
}

TEST_CASE("tangential stress compatibility") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  SUBCASE("rest state with hydrostatic pressure, no surface tension") {
    State s = perturbed(g, 1e-2);
    // traces p = rho+ g eta+ on top and [p] = [rho] g eta- at the interface
    const Eigen::ArrayXd top = prm.rho_plus * prm.g * s.eta_plus.physical();
    const Eigen::ArrayXd below = top - prm.density_jump() * prm.g * s.eta_minus.physical();
    Vol pv = vol_constant(*g, 0.0);
    const int nm = g->nmodes();
    for (int j = 0; j < g->nz(Layer::Upper); ++j) pv.up.segment(j * nm, nm) = top;
    for (int j = 0; j < g->nz(Layer::Lower); ++j) pv.lo.segment(j * nm, nm) = below;
    s.p = LayeredField::from_physical(g, pv, Jump::Discontinuous);
    const CompatibilityReport r =
        check_compatibility(s.u, s.p, s.eta_plus, s.eta_minus, prm, Mode::NoSurfaceTension);
    CHECK(r.pass);
    CHECK(r.top < 1e-15);
    CHECK(r.interface < 1e-15);
  }
  SUBCASE("rest state with surface tension: curvature leaves a fourth-order defect") {
    auto defect = [&](double eps) {
      const State s = perturbed(g, eps);
      return check_compatibility(s.u, s.p, s.eta_plus, s.eta_minus, prm, Mode::SurfaceTension);
    };
    const CompatibilityReport a = defect(1e-2), b = defect(5e-3);
    CHECK(a.pass);
    CHECK(std::log2(a.top / b.top) == doctest::Approx(4.0).epsilon(0.02));
    CHECK(std::log2(a.interface / b.interface) == doctest::Approx(4.0).epsilon(0.02));
  }
  SUBCASE("shear at a flat top") {
    // u1 = z cos x2: (Du e3)_1 = cos x2 on both surfaces, so the top fails with mu+
    // and the interface with the viscosity jump
    State s = zero_state(g);
    auto a = [](double, double x2, double z) { return z * std::cos(x2); };
    s.u[0] = LayeredField::from_physical(g, oracle::sample(*g, a, a));
    const CompatibilityReport r =
        check_compatibility(s.u, s.p, s.eta_plus, s.eta_minus, prm, Mode::SurfaceTension);
    CHECK_FALSE(r.pass);
    CHECK(r.top == doctest::Approx(prm.mu_plus).epsilon(1e-10));
    CHECK(r.interface == doctest::Approx(std::abs(prm.mu_plus - prm.mu_minus)).epsilon(1e-10));
  }
}

TEST_CASE("a corrector that does not contract ends the run cleanly") {
  // slopes of order 0.2 at |k| = 2 are beyond the reach of the fixed-point
  // corrector without surface tension
  const GridPtr g = Grid::make(1.0, 1.0, 8, 8, 10, 12, 1.0);
  const FluidParams prm = oracle::uneven();
  std::mt19937_64 rng(8);
  State s = zero_state(g);
  s.eta_plus = oracle::random_surface(g, 2, 1e-2, rng);
  s.eta_minus = oracle::random_surface(g, 2, 1e-2, rng);
  RunOptions o;
  o.dt = 1e-2;
  o.t_end = 0.05;
  o.mode = Mode::NoSurfaceTension;
  int snaps = 0;
  RunObserver obs;
  obs.on_snapshot = [&](const State&) { ++snaps; };
  const RunResult r = run(s, o, prm, obs);
  CHECK(r.aborted);
  CHECK(r.abort_reason.find("corrector did not settle") != std::string::npos);
  CHECK(snaps == 1);
}
