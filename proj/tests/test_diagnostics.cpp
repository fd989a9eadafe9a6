#include <doctest.h>

#include "oracles.hpp"
#include "siw/diagnostics.hpp"
#include "siw/timestepper.hpp"

#include <set>

using namespace siw;

namespace {

const double pi = M_PI;

GridPtr grid(int N = 6, int nz = 10) { return Grid::make(1.0, 1.0, N, N, nz, nz, 1.0); }

State scaled(State s, double c) {
  for (auto& f : s.u) f *= c;
  s.p *= c;
  if (s.p_prev.valid()) s.p_prev *= c;
  s.eta_plus *= c;
  s.eta_minus *= c;
  return s;
}

// a state two linear steps away from a perturbed rest state
State moving_state(const GridPtr& g, const FluidParams& prm) {
  State s = zero_state(g);
  s.eta_plus = SurfaceField::cosine(g, 1, 0, 1e-2);
  s.eta_minus = SurfaceField::cosine(g, 1, 1, 1e-2);
  const LinearStepper step(g, prm, 1e-2, Mode::SurfaceTension);
  s = step.step(s, LinearForcing{});
  return step.step(s, LinearForcing{});
}

}  // namespace

TEST_CASE("base energy of closed-form fields") {
  const GridPtr g = grid();
  FluidParams prm = oracle::light_over_heavy();  // rho 1 over 2, sigma 1, g 1
  State s = zero_state(g);
  s.eta_plus = SurfaceField::cosine(g, 1, 0, 1.0);
  s.eta_minus = SurfaceField::cosine(g, 0, 1, 1.0);
  s.u[0] = LayeredField::from_physical(g, vol_constant(*g, 1.0));
  // kinetic 1/2 (1 * 4 pi^2 + 2 * 4 pi^2), top 1/2 * 2 pi^2, interface -1/2 (1 - 2) 2 pi^2
  CHECK(base_energy(s, prm, false) == doctest::Approx(6 * pi * pi + pi * pi + pi * pi).epsilon(1e-12));
  // surface tension adds 1/2 * 2 pi^2 per surface
  CHECK(base_energy(s, prm, true) == doctest::Approx(10 * pi * pi).epsilon(1e-12));
}

TEST_CASE("dissipation of a linear shear") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  VectorField u = make_vector(g);
  u[0] = LayeredField::from_physical(g, vol_x3(*g));
  // |Du|^2 = 2 everywhere: 1/2 int mu |Du|^2 = 4 pi^2 (mu+ + mu- b0)
  CHECK(base_dissipation(u, prm) == doctest::Approx(4 * pi * pi * (prm.mu_plus + prm.mu_minus * prm.b0)).epsilon(1e-12));
  CHECK(base_dissipation(make_vector(g), prm) == 0.0);
}

TEST_CASE("energy and dissipation are quadratic in the state") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  const State s = moving_state(g, prm);
  const EnergyReport a = evaluate_report(s, prm, Mode::SurfaceTension);
  const EnergyReport b = evaluate_report(scaled(s, 3.0), prm, Mode::SurfaceTension);
  CHECK(a.E > 0.0);
  CHECK(a.D > 0.0);
  CHECK(b.E / a.E == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(b.D / a.D == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(b.base_energy_st / a.base_energy_st == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(a.dtu_linearized);
}

TEST_CASE("the equilibrium has zero energy, dissipation and identity residual") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  RunOptions o;
  o.dt = 1e-2;
  o.t_end = 0.05;
  const RunResult r = run(zero_state(g), o, prm);
  REQUIRE(r.reports.size() == 6);
  for (const EnergyReport& e : r.reports) {
    CHECK(e.E == 0.0);
    CHECK(e.D == 0.0);
  }
  const IdentityResidual res = energy_identity_residual(r.reports, o.dt, true);
  CHECK(res.residuals.size() == 5);
  CHECK(res.max_abs == 0.0);
}

TEST_CASE("energy identity residual shrinks linearly with dt") {
  const GridPtr g = grid();
  FluidParams prm = oracle::light_over_heavy();
  auto residual = [&](double dt) {
    RunOptions o;
    o.dt = dt;
    o.t_end = 0.04;
    o.linear = true;
    State s = zero_state(g);
    s.eta_plus = SurfaceField::cosine(g, 1, 0, 1e-2);
    const RunResult r = run(s, o, prm);
    return energy_identity_residual(r.reports, dt, true).max_abs;
  };
  const double r1 = residual(4e-3), r2 = residual(2e-3), r3 = residual(1e-3);
  CHECK(std::log2(r1 / r2) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::log2(r2 / r3) == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("decay fits recover exact models") {
  std::vector<double> t, e1, e2;
  for (int i = 0; i < 50; ++i) {
    t.push_back(0.1 * i);
    e1.push_back(3.0 * std::exp(-2.0 * t.back()));
    e2.push_back(0.5 * std::pow(1.0 + t.back(), -4.0));
  }
  const DecayFit a = fit_decay(t, e1, DecayModel::Exponential);
  CHECK(a.rate == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(a.log_c == doctest::Approx(std::log(3.0)).epsilon(1e-6));
  CHECK(a.r2 > 1.0 - 1e-10);
  CHECK(a.samples == 50);
  const DecayFit b = fit_decay(t, e2, DecayModel::Algebraic);
  CHECK(b.rate == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(b.r2 > 1.0 - 1e-10);

  const DecayFit c = fit_decay(t, e1, DecayModel::Exponential, 0.5);
  CHECK(c.samples == 25);
  CHECK(c.rate == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("decay fits reject unusable input") {
  std::vector<double> t(9), e(9, 1.0);
  for (int i = 0; i < 9; ++i) t[i] = i;
  CHECK_THROWS_AS(fit_decay(t, e, DecayModel::Exponential), InvalidArgument);
  t.push_back(9.0);
  e.push_back(0.0);
  CHECK_THROWS_AS(fit_decay(t, e, DecayModel::Exponential), InvalidArgument);
  e.back() = 1.0;
  CHECK_NOTHROW(fit_decay(t, e, DecayModel::Exponential));
  e.pop_back();
  CHECK_THROWS_AS(fit_decay(t, e, DecayModel::Exponential), InvalidArgument);
}

TEST_CASE("report columns") {
  const auto& cols = energy_report_columns();
  CHECK(cols.size() == energy_report_values(EnergyReport{}).size());
  CHECK(std::set<std::string>(cols.begin(), cols.end()).size() == cols.size());
  CHECK(cols[0] == "step");
  CHECK(cols[2] == "E");
}
