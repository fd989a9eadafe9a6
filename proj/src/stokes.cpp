#include "siw/stokes.hpp"

#include "siw/nonlinear.hpp"
#include "siw/parallel.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <sstream>

namespace siw {

namespace {

const GridPtr& grid_of(const StokesData& d) {
  for (const auto& f : d.F1)
    if (f.valid()) return f.grid();
  if (d.F2.valid()) return d.F2.grid();
  for (const auto* s : {&d.F3plus, &d.F3minus})
    for (const auto& f : *s)
      if (f.valid()) return f.grid();
  throw InvalidArgument("Stokes data carries no grid");
}

LayeredField plus(const LayeredField& a, const LayeredField& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  return a + b;
}

SurfaceField plus(const SurfaceField& a, const SurfaceField& b) {
  if (!a.valid()) return b;
  if (!b.valid()) return a;
  return a + b;
}

StokesData add(const StokesData& d, const StokesPerturbation& G) {
  StokesData out;
  for (int i = 0; i < 3; ++i) {
    out.F1[i] = plus(d.F1[i], G.G1[i]);
    out.F3plus[i] = plus(d.F3plus[i], G.G3plus[i]);
    out.F3minus[i] = plus(d.F3minus[i], G.G3minus[i]);
  }
  out.F2 = plus(d.F2, G.G2);
  return out;
}

LayeredField laplacian(const LayeredField& f) { return f.d(0).d(0) + f.d(1).d(1) + f.d3(2); }

// largest modulus over the nodes of a layer in [first, last)
double max_nodes(const LayeredField& f, Layer l, int first, int last) {
  if (!f.valid()) return 0.0;
  const int nm = f.grid()->nmodes();
  double r = 0.0;
  for (int j = first; j < last; ++j) r = std::max(r, f.layer(l).segment(j * nm, nm).abs().maxCoeff());
  return r;
}

double max_interior(const LayeredField& f) {
  double r = 0.0;
  for (Layer l : {Layer::Upper, Layer::Lower}) r = std::max(r, max_nodes(f, l, 1, f.grid()->nz(l) - 1));
  return r;
}

double max_abs(const SurfaceField& s) { return s.valid() ? s.coeffs().abs().maxCoeff() : 0.0; }

double ratio(double res, double scale) { return res == 0.0 ? 0.0 : res / std::max(scale, DBL_MIN); }

double data_max(const StokesData& d) {
  double r = d.F2.valid() ? d.F2.max_abs() : 0.0;
  for (int i = 0; i < 3; ++i) {
    if (d.F1[i].valid()) r = std::max(r, d.F1[i].max_abs());
    r = std::max({r, max_abs(d.F3plus[i]), max_abs(d.F3minus[i])});
  }
  return r;
}

SurfaceField zero_if_invalid(const SurfaceField& s, const GridPtr& g) { return s.valid() ? s : SurfaceField(g); }

// stress vector (p I - mu Du) e3 at one node of one layer
SurfaceVector stress(const VectorField& u, const LayeredField& p, double mu, Layer l, int node) {
  SurfaceVector s;
  for (int i = 0; i < 2; ++i) s[i] = -mu * (u[i].d3(1).slice(l, node) + u[2].d(i).slice(l, node));
  s[2] = p.slice(l, node) - 2.0 * mu * u[2].d3(1).slice(l, node);
  return s;
}

ModeLUBank scalar_bank(const GridPtr& g, double w_plus, double w_minus, Exec exec, const char* context) {
  return ModeLUBank(
      g, [g, w_plus, w_minus](int m) { return assemble_scalar_matrix(g->vertical(), w_plus, w_minus, g->nabs2(m)); },
      exec, true, context);
}

void unpack_scalar(const Grid& g, const Eigen::VectorXcd& x, int m, LayeredField& q) {
  const int nu = g.nz(Layer::Upper);
  const int mc = g.conj_index(m);
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const int off = l == Layer::Upper ? 0 : nu;
    for (int j = 0; j < g.nz(l); ++j) {
      q.at(l, j, m) = x[off + j];
      if (mc != m) q.at(l, j, mc) = std::conj(x[off + j]);
    }
  }
}

Eigen::VectorXcd stacked(const Grid& g, const LayeredField& f, int m) {
  const int nu = g.nz(Layer::Upper), nl = g.nz(Layer::Lower);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(nu + nl);
  if (!f.valid()) return v;
  for (int j = 0; j < nu; ++j) v[j] = f.at(Layer::Upper, j, m);
  for (int j = 0; j < nl; ++j) v[nu + j] = f.at(Layer::Lower, j, m);
  return v;
}

cplx coeff(const SurfaceField& s, int m) { return s.valid() ? s[m] : cplx(0.0); }

void scale_layer(LayeredField& f, Layer l, double s) { f.layer(l) *= s; }

}  // namespace

StokesSolver::StokesSolver(GridPtr grid, const FluidParams& params, Exec exec, bool cache)
    : grid_(grid),
      params_(params),
      bank_(grid, params, [](int) { return ModeCoeffs{}; }, exec, cache, "stationary Stokes") {}

StokesSolution StokesSolver::solve(const StokesData& d) const {
  ModeForcing f{d.F1, d.F2, d.F3plus, d.F3minus};
  StokesSolution s;
  bank_.solve(f, nullptr, s.u, s.p);
  return s;
}

StokesSolution solve_two_phase_stokes(const GridPtr& grid, const StokesData& data, const FluidParams& params,
                                      Exec exec) {
  return StokesSolver(grid, params, exec, true).solve(data);
}

double StokesResidual::max() const {
  return std::max({momentum, divergence, top, continuity, stress_jump, bottom});
}

StokesResidual stokes_residual(const StokesSolution& sol, const StokesData& data, const FluidParams& params) {
  const GridPtr& g = sol.p.grid();
  const int nu = g->nz(Layer::Upper), nl = g->nz(Layer::Lower);
  StokesResidual r;
  // Floor for every group, so that groups whose terms all vanish do not
  // report rounding noise as an O(1) relative error.
  const double floor = std::max({max_abs(sol.u), sol.p.max_abs(), data_max(data)});

  double mom = 0.0, mom_scale = floor;
  for (int i = 0; i < 3; ++i) {
    LayeredField visc = laplacian(sol.u[i]);
    scale_layer(visc, Layer::Upper, -params.mu_plus);
    scale_layer(visc, Layer::Lower, -params.mu_minus);
    const LayeredField grad = sol.p.d(i);
    LayeredField res = visc + grad;
    if (data.F1[i].valid()) res -= data.F1[i];
    mom = std::max(mom, max_interior(res));
    mom_scale = std::max({mom_scale, max_interior(visc), max_interior(grad),
                          data.F1[i].valid() ? max_interior(data.F1[i]) : 0.0});
  }
  r.momentum = ratio(mom, mom_scale);

  // The node-0 slot of the zero mode holds vertical momentum instead of the
  // divergence, so it is left out here.
  const LayeredField div = sol.u[0].d(0) + sol.u[1].d(1) + sol.u[2].d3(1);
  LayeredField dres = data.F2.valid() ? div - data.F2 : div;
  const int zero = g->mode_index(0, 0);
  for (Layer l : {Layer::Upper, Layer::Lower}) dres.at(l, 0, zero) = 0.0;
  r.divergence = ratio(dres.max_abs(), std::max({floor, div.max_abs(), data.F2.valid() ? data.F2.max_abs() : 0.0}));

  const SurfaceVector top = stress(sol.u, sol.p, params.mu_plus, Layer::Upper, 0);
  const SurfaceVector sp = stress(sol.u, sol.p, params.mu_plus, Layer::Upper, nu - 1);
  const SurfaceVector sm = stress(sol.u, sol.p, params.mu_minus, Layer::Lower, 0);
  double t = 0, ts = floor, c = 0, cs = floor, j = 0, js = floor, b = 0, bs = floor;
  for (int i = 0; i < 3; ++i) {
    const SurfaceField f3p = zero_if_invalid(data.F3plus[i], g);
    const SurfaceField f3m = zero_if_invalid(data.F3minus[i], g);
    t = std::max(t, max_abs(top[i] - f3p));
    ts = std::max({ts, max_abs(top[i]), max_abs(f3p)});
    const SurfaceField up = sol.u[i].trace_interface(Layer::Upper), lo = sol.u[i].trace_interface(Layer::Lower);
    c = std::max(c, max_abs(up - lo));
    cs = std::max({cs, max_abs(up), max_abs(lo)});
    j = std::max(j, max_abs(sp[i] - sm[i] + f3m));
    js = std::max({js, max_abs(sp[i]), max_abs(sm[i]), max_abs(f3m)});
    b = std::max(b, max_abs(sol.u[i].trace_bottom()));
    bs = std::max(bs, max_nodes(sol.u[i], Layer::Lower, 0, nl));
  }
  r.top = ratio(t, ts);
  r.continuity = ratio(c, cs);
  r.stress_jump = ratio(j, js);
  r.bottom = ratio(b, bs);
  return r;
}

LayeredField divergence_potential(const LayeredField& target, Exec exec) {
  const GridPtr& g = target.grid();
  const ModeLUBank bank = scalar_bank(g, 1.0, 1.0, exec, "divergence potential");
  LayeredField phi(g, Jump::Continuous);
  bank.solve_all(
      [&](int m) {
        ScalarModeData d;
        d.f1 = -stacked(*g, target, m);
        return pack_scalar_rhs(g->vertical(), d);
      },
      [&](int m, const Eigen::VectorXcd& x) { unpack_scalar(*g, x, m, phi); });
  return phi;
}

VectorField divergence_adjust(const LayeredField& target, Exec exec) {
  const GridPtr& g = target.grid();
  const LayeredField phi = divergence_potential(target, exec);
  VectorField v;
  for (int i = 0; i < 3; ++i) {
    v[i] = -1.0 * phi.d(i);
    v[i].set_jump(Jump::Continuous);
  }

  const ChebLayer& lo = g->layer(Layer::Lower);
  const int nl = lo.size();
  const double b = g->b0();
  const int nm = g->nmodes();
  parallel_for(nm, exec, [&](std::ptrdiff_t mi) {
    const int m = int(mi);
    const cplx phib = phi.at(Layer::Lower, nl - 1, m);
    if (phib == 0.0) return;
    const cplx in1(0.0, g->n1(m)), in2(0.0, g->n2(m));
    for (int j = 0; j < nl; ++j) {
      const double t = (lo.z()[j] + b) / b;
      const double psi = (1.0 - t) * (1.0 - 3.0 * t);
      v[0].at(Layer::Lower, j, m) += in1 * phib * psi;
      v[1].at(Layer::Lower, j, m) += in2 * phib * psi;
      v[2].at(Layer::Lower, j, m) += g->nabs2(m) * phib * b * t * (1.0 - t) * (1.0 - t);
    }
  });
  // exact endpoint values: the cubic cancels the trace up to rounding
  for (int i = 0; i < 3; ++i) v[i].layer(Layer::Lower).segment((nl - 1) * nm, nm).setZero();
  return v;
}

LayeredField solve_two_phase_poisson(const LayeredField& f1, const SurfaceField& f2, const SurfaceField& f3,
                                     const SurfaceField& f4, const SurfaceField& f5, const FluidParams& params,
                                     Exec exec) {
  GridPtr g;
  if (f1.valid()) {
    g = f1.grid();
  } else {
    for (const SurfaceField* s : {&f2, &f3, &f4, &f5})
      if (s->valid()) g = s->grid();
  }
  if (!g) throw InvalidArgument("Poisson data carries no grid");
  const ModeLUBank bank = scalar_bank(g, params.rho_plus, params.rho_minus, exec, "two-phase Poisson");
  LayeredField p(g, Jump::Discontinuous);
  bank.solve_all(
      [&](int m) {
        ScalarModeData d;
        d.f1 = stacked(*g, f1, m);
        d.top = coeff(f2, m);
        d.jump = coeff(f3, m);
        d.flux_jump = coeff(f4, m);
        d.bottom = coeff(f5, m);
        return pack_scalar_rhs(g->vertical(), d);
      },
      [&](int m, const Eigen::VectorXcd& x) { unpack_scalar(*g, x, m, p); });
  return p;
}

namespace {

double state_max(const StokesSolution& s) { return std::max(max_abs(s.u), s.p.max_abs()); }

double state_diff(const StokesSolution& a, const StokesSolution& b) {
  double d = (a.p - b.p).max_abs();
  for (int i = 0; i < 3; ++i) d = std::max(d, (a.u[i] - b.u[i]).max_abs());
  return d;
}

}  // namespace

AStokesResult solve_A_stokes(const StokesData& data, const GeometryCache& cache, const FluidParams& params,
                             double tol, int max_iter, Exec exec) {
  const GridPtr& g = grid_of(data);
  const StokesSolver solver(g, params, exec, true);
  AStokesResult r;
  r.sol = solver.solve(data);
  for (int k = 0; k < max_iter; ++k) {
    const StokesPerturbation G = a_stokes_perturbation(r.sol.u, r.sol.p, cache, params, exec);
    StokesSolution next = solver.solve(add(data, G));
    const double upd = ratio(state_diff(next, r.sol), state_max(next));
    r.sol = std::move(next);
    r.updates.push_back(upd);
    r.iterations = k + 1;
    if (upd < tol) {
      const StokesPerturbation Gf = a_stokes_perturbation(r.sol.u, r.sol.p, cache, params, exec);
      r.residual = stokes_residual(r.sol, add(data, Gf), params).max();
      return r;
    }
  }
  const std::size_t n = r.updates.size();
  const double last = n ? r.updates[n - 1] : 0.0;
  const double previous = n > 1 ? r.updates[n - 2] : last;
  std::ostringstream os;
  os << "A-Stokes iteration did not contract in " << max_iter << " corrections (last updates " << previous << ", "
     << last << "); the surface deformation is too large";
  throw NonContractionError(os.str(), previous, last);
}

LayeredField initial_pressure(const VectorField& u0, const SurfaceField& eta_plus, const SurfaceField& eta_minus,
                              const VectorField& f0, const SurfaceVector& top, const SurfaceVector& jump,
                              const FluidParams& params, Mode mode, Exec exec) {
  const GridPtr& g = u0[2].grid();
  const int nu = g->nz(Layer::Upper), nl = g->nz(Layer::Lower);
  const double st = mode == Mode::SurfaceTension ? 1.0 : 0.0;
  const double rp = params.rho_plus, rm = params.rho_minus, mp = params.mu_plus, mm = params.mu_minus;

  LayeredField f1(g, Jump::Discontinuous);
  for (int i = 0; i < 3; ++i)
    if (f0[i].valid()) f1 += f0[i].d(i);
  scale_layer(f1, Layer::Upper, 1.0 / rp);
  scale_layer(f1, Layer::Lower, 1.0 / rm);

  const LayeredField du3 = u0[2].d3(1);
  const LayeredField lap3 = laplacian(u0[2]);
  const SurfaceField ep = zero_if_invalid(eta_plus, g), em = zero_if_invalid(eta_minus, g);

  SurfaceField f2 = zero_if_invalid(top[2], g) + (2.0 * mp) * du3.slice(Layer::Upper, 0) + (rp * params.g) * ep -
                    (st * params.sigma_plus) * ep.laplacian();
  SurfaceField f3 = (2.0 * mp) * du3.slice(Layer::Upper, nu - 1) - (2.0 * mm) * du3.slice(Layer::Lower, 0) +
                    (params.density_jump() * params.g) * em + (st * params.sigma_minus) * em.laplacian() -
                    zero_if_invalid(jump[2], g);

  auto vertical = [&](Layer l, int node, double mu) {
    SurfaceField s = mu * lap3.slice(l, node);
    if (f0[2].valid()) s += f0[2].slice(l, node);
    return s;
  };
  const SurfaceField f4 =
      (1.0 / rp) * vertical(Layer::Upper, nu - 1, mp) - (1.0 / rm) * vertical(Layer::Lower, 0, mm);
  const SurfaceField f5 = (-1.0 / rm) * vertical(Layer::Lower, nl - 1, mm);
  return solve_two_phase_poisson(f1, f2, f3, f4, f5, params, exec);
}

}  // namespace siw
