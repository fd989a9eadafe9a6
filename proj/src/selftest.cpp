#include "siw/selftest.hpp"

#include "siw/diagnostics.hpp"
#include "siw/geometry.hpp"
#include "siw/stability.hpp"
#include "siw/stokes.hpp"
#include "siw/timestepper.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace siw {

namespace {

FluidParams two_fluid() {
  FluidParams p;
  p.rho_plus = 2.0;
  p.rho_minus = 1.0;
  p.mu_plus = 1.5;
  p.mu_minus = 0.7;
  p.g = 1.0;
  p.sigma_plus = 1.0;
  p.sigma_minus = 1.5;
  return p;
}

SelftestCase make_case(std::string name, double value, double limit, std::string detail = {}) {
  return {std::move(name), value <= limit, value, limit, std::move(detail)};
}

// Constant pressure 3 above and 5 below, zero velocity.
SelftestCase hydrostatic(Exec exec) {
  const FluidParams p = two_fluid();
  const GridPtr g = Grid::make(1.0, 1.0, 4, 4, 10, 10, p.b0);
  const int m0 = g->mode_index(0, 0);
  StokesData d;
  d.F3plus = make_surface_vector(g);
  d.F3minus = make_surface_vector(g);
  d.F3plus[2][m0] = 3.0;
  d.F3minus[2][m0] = 2.0;  // [p] = -2
  const StokesSolution s = solve_two_phase_stokes(g, d, p, exec);
  const Vol ph = s.p.physical(exec);
  double err = std::max((ph.up - 3.0).abs().maxCoeff(), (ph.lo - 5.0).abs().maxCoeff());
  err = std::max(err, max_abs(s.u));
  return make_case("stokes_hydrostatic", err, 1e-10, "p = 3 above, 5 below, u = 0");
}

// u3 = W(z) cos(x1), u1 = -W'(z) sin(x1), W = (z + b)^2 e^z, p = cos(z) cos(x1)
// above and e^z / 2 cos(x1) below.
double manufactured_error(int nz, Exec exec) {
  const FluidParams prm = two_fluid();
  const double b = prm.b0;
  const GridPtr g = Grid::make(1.0, 1.0, 4, 4, nz, nz, b);
  auto W = [b](double z, int k) {
    const double s = z + b;
    const double poly[4] = {s * s, 2 * s + s * s, 2 + 4 * s + s * s, 6 + 6 * s + s * s};
    return poly[k] * std::exp(z);
  };
  auto P = [](Layer l, double z, int k) {
    if (l == Layer::Lower) return 0.5 * std::exp(z);
    const double c[4] = {std::cos(z), -std::sin(z), -std::cos(z), std::sin(z)};
    return c[k];
  };
  const int nm = g->nmodes();
  Vol f1 = vol_constant(*g, 0.0), f3 = f1, u1 = f1, u3 = f1, pe = f1;
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const double mu = prm.mu(l);
    const auto& zs = g->layer(l).z();
    for (int j = 0; j < zs.size(); ++j) {
      const double z = zs[j];
      // S = -W', S'' = -W'''
      const double S = -W(z, 1), S2 = -W(z, 3);
      for (int i1 = 0; i1 < g->N1(); ++i1)
        for (int i2 = 0; i2 < g->N2(); ++i2) {
          const int k = j * nm + i1 * g->N2() + i2;
          const double sx = std::sin(g->x1(i1)), cx = std::cos(g->x1(i1));
          f1.layer(l)[k] = (-mu * (S2 - S) - P(l, z, 0)) * sx;
          f3.layer(l)[k] = (-mu * (W(z, 2) - W(z, 0)) + P(l, z, 1)) * cx;
          u1.layer(l)[k] = S * sx;
          u3.layer(l)[k] = W(z, 0) * cx;
          pe.layer(l)[k] = P(l, z, 0) * cx;
        }
    }
  }
  // (p I - mu Du) e3: first component -mu (S' - W) sin, third (P - 2 mu W') cos
  auto traction = [&](Layer l, double z) {
    const double mu = prm.mu(l);
    return std::array<double, 2>{-mu * (-W(z, 2) - W(z, 0)), P(l, z, 0) - 2.0 * mu * W(z, 1)};
  };
  const int m = g->mode_index(1, 0);
  auto put = [&](SurfaceVector& v, std::array<double, 2> t) {
    // sin x1 = (e^{ix} - e^{-ix}) / 2i, cos x1 = (e^{ix} + e^{-ix}) / 2
    v[0][m] = cplx(0.0, -0.5 * t[0]);
    v[0][g->conj_index(m)] = cplx(0.0, 0.5 * t[0]);
    v[2][m] = 0.5 * t[1];
    v[2][g->conj_index(m)] = 0.5 * t[1];
  };
  StokesData d;
  d.F1 = {LayeredField::from_physical(g, f1, Jump::Discontinuous), LayeredField(g, Jump::Discontinuous),
          LayeredField::from_physical(g, f3, Jump::Discontinuous)};
  d.F3plus = make_surface_vector(g);
  d.F3minus = make_surface_vector(g);
  put(d.F3plus, traction(Layer::Upper, 1.0));
  const auto up = traction(Layer::Upper, 0.0), lo = traction(Layer::Lower, 0.0);
  put(d.F3minus, {lo[0] - up[0], lo[1] - up[1]});

  const StokesSolution s = solve_two_phase_stokes(g, d, prm, exec);
  const Vol a1 = s.u[0].physical(exec), a3 = s.u[2].physical(exec), ap = s.p.physical(exec);
  return std::max({(a1 - u1).max_abs(), (a3 - u3).max_abs(), (ap - pe).max_abs()});
}

SelftestCase manufactured(Exec exec) {
  const double e8 = manufactured_error(8, exec), e16 = manufactured_error(16, exec);
  std::ostringstream os;
  os << "error " << e8 << " at nz = 8, " << e16 << " at nz = 16";
  SelftestCase c = make_case("stokes_manufactured", e16, 1e-9, os.str());
  c.pass = c.pass && e16 < 1e-3 * e8;
  return c;
}

// Backward Euler makes the residual of the linear energy identity first order
// in dt; halving dt should halve it.
SelftestCase energy_identity(Exec exec) {
  FluidParams prm = two_fluid();
  prm.rho_plus = 1.0;
  prm.rho_minus = 2.0;
  const GridPtr g = Grid::make(1.0, 1.0, 6, 6, 10, 10, prm.b0);
  auto max_residual = [&](double dt) {
    State s = zero_state(g);
    s.eta_plus = SurfaceField::cosine(g, 1, 0, 1e-2);
    s.eta_minus = SurfaceField::cosine(g, 1, 1, 1e-2);
    const LinearStepper step(g, prm, dt, Mode::SurfaceTension, exec);
    std::vector<EnergyReport> w;
    auto record = [&] {
      EnergyReport r;
      r.base_energy_st = base_energy(s, prm, true);
      r.base_dissipation = base_dissipation(s.u, prm);
      w.push_back(r);
    };
    record();
    for (int k = 0; k < int(std::lround(0.04 / dt)); ++k) {
      s = step.step(s, LinearForcing{});
      record();
    }
    return energy_identity_residual(w, dt, true).max_abs;
  };
  const double r1 = max_residual(4e-3), r2 = max_residual(2e-3);
  const double ratio = r1 / r2;
  std::ostringstream os;
  os << "residual " << r1 << " at dt = 4e-3, " << r2 << " at dt = 2e-3";
  SelftestCase c = make_case("energy_identity", std::abs(ratio - 2.0), 0.3, os.str());
  return c;
}

SelftestCase vandermonde() {
  const ExtensionSpec spec = default_extension();
  const GridPtr g = Grid::make(1.0, 1.0, 8, 8, 8, 8, 1.0);
  SurfaceField eta = SurfaceField::cosine(g, 1, 2, 0.3) + SurfaceField::cosine(g, 2, 0, 0.2);
  double worst = spec.residual;
  for (int k = 0; k <= spec.m; ++k) {
    const double below = evaluate_extension(eta, ExtensionKind::Lower, spec, 0.3, 0.7, 0.0, 0, 0, k);
    const double above = evaluate_extension(eta, ExtensionKind::Lower, spec, 0.3, 0.7, 1e-300, 0, 0, k);
    worst = std::max(worst, std::abs(above - below) / std::max(1.0, std::abs(below)));
  }
  std::ostringstream os;
  os << "m = " << spec.m << ", system residual " << spec.residual;
  return make_case("vandermonde_extension", worst, 1e-10, os.str());
}

SelftestCase coercivity() {
  FluidParams prm = two_fluid();
  prm.sigma_minus = 1.5 * prm.critical_sigma();
  const GridPtr g = Grid::make(1.0, 1.0, 8, 8, 4, 4, 1.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    SurfaceField eta(g);
    for (int m : g->canonical_modes()) {
      if (g->nabs2(m) == 0.0 || !g->in_band(m)) continue;
      const double re = nd(rng);
      eta[m] = cplx(re, nd(rng));
      eta[g->conj_index(m)] = std::conj(eta[m]);
    }
    const CoercivityResult r = coercivity_check(eta, prm);
    worst = std::max(worst, -r.margin / std::max(1.0, std::abs(r.lhs)));
  }
  return make_case("coercivity", worst, 1e-10, "200 random zero-mean surfaces, sigma_- = 1.5 sigma_c");
}

template <class F>
SelftestCase guarded(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, NAN, 0.0, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<SelftestCase> run_selftest(Exec exec) {
  return {guarded("stokes_manufactured", [&] { return manufactured(exec); }),
          guarded("stokes_hydrostatic", [&] { return hydrostatic(exec); }),
          guarded("energy_identity", [&] { return energy_identity(exec); }),
          guarded("vandermonde_extension", [] { return vandermonde(); }),
          guarded("coercivity", [] { return coercivity(); })};
}

void print_selftest(std::ostream& os, const std::vector<SelftestCase>& cases) {
  os << std::left << std::setw(24) << "check" << std::setw(8) << "result" << std::setw(14) << "value"
     << std::setw(10) << "limit" << "detail\n";
  for (const SelftestCase& c : cases) {
    std::ostringstream v, l;
    v << std::setprecision(3) << c.value;
    l << std::setprecision(3) << c.limit;
    os << std::left << std::setw(24) << c.name << std::setw(8) << (c.pass ? "PASS" : "FAIL") << std::setw(14)
       << v.str() << std::setw(10) << l.str() << c.detail << '\n';
  }
}

bool all_pass(const std::vector<SelftestCase>& cases) {
  for (const SelftestCase& c : cases)
    if (!c.pass) return false;
  return true;
}

}  // namespace siw
