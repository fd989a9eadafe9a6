#include "siw/timestepper.hpp"

#include <cmath>
#include <sstream>

namespace siw {

State zero_state(const GridPtr& g) {
  State s;
  s.u = make_vector(g, Jump::Continuous);
  s.p = LayeredField(g, Jump::Discontinuous);
  s.eta_plus = SurfaceField(g);
  s.eta_minus = SurfaceField(g);
  return s;
}

namespace {

cplx coeff(const SurfaceField& s, int m) { return s.valid() ? s[m] : cplx(0.0); }

// the lower-side trace is the one the interface rows act on
SurfaceField interface_u3(const VectorField& u) { return u[2].trace_interface(Layer::Lower); }

SurfaceField plus_if(SurfaceField a, const SurfaceField& b) {
  if (b.valid()) a += b;
  return a;
}

void pin_zero_mode(SurfaceField& f) { f[f.grid()->mode_index(0, 0)] = 0.0; }

double state_max(const State& s) {
  return std::max({max_abs(s.u), s.p.max_abs(), s.eta_plus.coeffs().abs().maxCoeff(),
                   s.eta_minus.coeffs().abs().maxCoeff()});
}

double state_diff(const State& a, const State& b) {
  double d = std::max({(a.p - b.p).max_abs(), (a.eta_plus - b.eta_plus).coeffs().abs().maxCoeff(),
                       (a.eta_minus - b.eta_minus).coeffs().abs().maxCoeff()});
  for (int i = 0; i < 3; ++i) d = std::max(d, (a.u[i] - b.u[i]).max_abs());
  return d;
}

// Pi v = v - (v . N) N / |N|^2, largest pointwise modulus
double tangential_max(const std::array<Eigen::ArrayXd, 3>& v, const std::array<Eigen::ArrayXd, 3>& N) {
  const Eigen::ArrayXd vn = v[0] * N[0] + v[1] * N[1] + v[2] * N[2];
  const Eigen::ArrayXd nn = N[0].square() + N[1].square() + N[2].square();
  Eigen::ArrayXd mag = Eigen::ArrayXd::Zero(vn.size());
  for (int i = 0; i < 3; ++i) mag += (v[i] - vn * N[i] / nn).square();
  return mag.size() ? std::sqrt(mag.maxCoeff()) : 0.0;
}

// (Du e3)_i = d3 u_i + d_i u3 at one node, physical
std::array<Eigen::ArrayXd, 3> du_e3(const VectorField& u, Layer l, int node) {
  std::array<Eigen::ArrayXd, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = (u[i].d3(1) + u[2].d(i)).slice(l, node).physical();
  return out;
}

}  // namespace

CompatibilityReport check_compatibility(const VectorField& u0, const LayeredField& p0, const SurfaceField& eta_plus,
                                        const SurfaceField& eta_minus, const FluidParams& params, Mode mode,
                                        const ExtensionSpec& spec, double threshold, Exec exec) {
  const GridPtr& g = u0[0].grid();
  const int nu = g->nz(Layer::Upper);
  const GeometryCache cache = build_geometry(eta_plus, eta_minus, std::nullopt, std::nullopt, params, spec, exec);
  SurfaceVector top, jump;
  if (mode == Mode::SurfaceTension) {
    const BoundaryForcing b = forcing_g(u0, cache, params, exec);
    top = b.plus;
    jump = b.minus;
  } else {
    const LayeredField p = p0.valid() ? p0 : LayeredField(g, Jump::Discontinuous);
    const ForcingSet f = perturbations_no_st(u0, p, cache, params, exec);
    top = f.G3plus;
    jump = f.G3minus;
  }
  const auto dtop = du_e3(u0, Layer::Upper, 0);
  const auto dup = du_e3(u0, Layer::Upper, nu - 1);
  const auto dlo = du_e3(u0, Layer::Lower, 0);
  std::array<Eigen::ArrayXd, 3> vt, vi;
  for (int i = 0; i < 3; ++i) {
    vt[i] = top[i].physical() + params.mu_plus * dtop[i];
    vi[i] = jump[i].physical() - (params.mu_plus * dup[i] - params.mu_minus * dlo[i]);
  }
  CompatibilityReport r;
  r.top = tangential_max(vt, cache.N[0]);
  r.interface = tangential_max(vi, cache.N[1]);
  r.pass = r.top <= threshold && r.interface <= threshold;
  return r;
}

LinearStepper::LinearStepper(GridPtr grid, const FluidParams& params, double dt, Mode mode, Exec exec, bool cache)
    : grid_(grid),
      params_(params),
      dt_(dt),
      mode_(mode),
      exec_(exec),
      bank_(
          grid, params,
          [g = grid, params, dt, mode](int m) {
            return step_coeffs(params, g->nabs2(m), dt, mode == Mode::SurfaceTension);
          },
          exec, cache, [dt] {
            std::ostringstream os;
            os << "implicit step, dt = " << dt;
            return os.str();
          }()) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive and finite");
}

State LinearStepper::step(const State& s, const LinearForcing& f) const {
  const Grid& g = *grid_;
  const bool st = mode_ == Mode::SurfaceTension;
  std::vector<ModeStateTerms> terms(g.nmodes());
  for (int m = 0; m < g.nmodes(); ++m) {
    ModeStateTerms& t = terms[m];
    t.u_old = &s.u;
    t.mass_plus = params_.rho_plus / dt_;
    t.mass_minus = params_.rho_minus / dt_;
    if (g.nabs2(m) > 0.0) {
      const Restoring c = restoring(params_, g.nabs2(m), st);
      t.top_normal = c.top * (s.eta_plus[m] + dt_ * coeff(f.K_plus, m));
      t.int_normal = c.interface * (s.eta_minus[m] + dt_ * coeff(f.K_minus, m));
    }
  }
  State out;
  bank_.solve(ModeForcing{f.F1, f.F2, f.top, f.jump}, [&](int m) { return &terms[m]; }, out.u, out.p);
  out.eta_plus = s.eta_plus + dt_ * plus_if(out.u[2].trace_top(), f.K_plus);
  out.eta_minus = s.eta_minus + dt_ * plus_if(interface_u3(out.u), f.K_minus);
  pin_zero_mode(out.eta_plus);
  pin_zero_mode(out.eta_minus);
  out.t = s.t + dt_;
  out.step = s.step + 1;
  out.p_prev = s.p;
  out.dt_prev = dt_;
  return out;
}

State step_linear_implicit(const State& s, const LinearForcing& f, double dt, Mode mode, const FluidParams& params,
                           Exec exec) {
  return LinearStepper(s.grid(), params, dt, mode, exec, false).step(s, f);
}

NonlinearStepper::NonlinearStepper(GridPtr grid, const FluidParams& params, double dt, Mode mode,
                                   NonlinearOptions opts)
    : linear_(std::move(grid), params, dt, mode, opts.exec, true), opts_(std::move(opts)) {}

ForcingSet NonlinearStepper::forcing(const State& s) const {
  const FluidParams& prm = linear_.params();
  const Exec exec = opts_.exec;
  auto geometry = [&](const SurfaceField& dtp, const SurfaceField& dtm) {
    GeometryCache c = build_geometry(s.eta_plus, s.eta_minus, dtp, dtm, prm, opts_.spec, exec);
    const DiffeoReport d = check_diffeo(c, opts_.j_floor);
    if (!d.ok) {
      std::ostringstream os;
      os << "flattening map degenerate at t = " << s.t << ": min J = " << d.min_j << " below " << opts_.j_floor;
      throw DiffeoError(os.str(), d.min_j);
    }
    return c;
  };
  if (linear_.mode() == Mode::SurfaceTension) {
    const GeometryCache c = geometry(s.u[2].trace_top(), interface_u3(s.u));
    ForcingSet f;
    f.mode = Mode::SurfaceTension;
    f.f = forcing_f(s.u, s.p, c, prm, exec);
    BoundaryForcing b = forcing_g(s.u, c, prm, exec);
    f.gplus = std::move(b.plus);
    f.gminus = std::move(b.minus);
    return f;
  }
  const GeometryCache c = geometry(kinematic_rate(s.u, s.eta_plus, 0), kinematic_rate(s.u, s.eta_minus, 1));
  return perturbations_no_st(s.u, s.p, c, prm, exec);
}

LinearForcing NonlinearStepper::frozen(const ForcingSet& f) const {
  LinearForcing lf;
  if (f.mode == Mode::SurfaceTension) {
    lf.F1 = f.f;
    lf.top = f.gplus;
    lf.jump = f.gminus;
  } else {
    lf.F1 = f.G1;
    lf.F2 = f.G2;
    lf.top = f.G3plus;
    lf.jump = f.G3minus;
    lf.K_plus = f.G4plus;
    lf.K_minus = f.G4minus;
  }
  return lf;
}

State NonlinearStepper::step(const State& s) const {
  ForcingSet f = forcing(s);
  State out = linear_.step(s, frozen(f));
  out.forcing = std::move(f);
  last_corrections_ = 0;
  if (linear_.mode() == Mode::SurfaceTension || opts_.picard_max <= 0) return out;

  double prev = 0.0, upd = 0.0;
  for (int k = 1; k <= opts_.picard_max; ++k) {
    ForcingSet fk = forcing(out);
    State next = linear_.step(s, frozen(fk));
    next.forcing = std::move(fk);
    const double scale = state_max(next);
    prev = upd;
    upd = scale > 0.0 ? state_diff(next, out) / scale : 0.0;
    out = std::move(next);
    last_corrections_ = k;
    if (upd < opts_.picard_tol) return out;
  }
  std::ostringstream os;
  os << "implicit corrector did not settle at t = " << s.t << " after " << opts_.picard_max
     << " iterations (last relative updates " << prev << ", " << upd << ")";
  throw ConvergenceError(os.str());
}

State step_nonlinear(const State& s, double dt, Mode mode, const FluidParams& params, const NonlinearOptions& opts) {
  return NonlinearStepper(s.grid(), params, dt, mode, opts).step(s);
}

RunResult run(State s, const RunOptions& o, const FluidParams& params, const RunObserver& obs) {
  if (!(o.dt > 0.0)) throw InvalidArgument("run: dt must be positive");
  if (o.diagnostics_every < 1) throw InvalidArgument("run: diagnostics cadence must be at least 1");
  const GridPtr g = s.grid();
  const long total = std::lround(o.t_end / o.dt);

  std::optional<LinearStepper> lin;
  std::optional<NonlinearStepper> nl;
  if (o.linear)
    lin.emplace(g, params, o.dt, o.mode, o.nonlinear.exec, true);
  else
    nl.emplace(g, params, o.dt, o.mode, o.nonlinear);

  RunResult res;
  auto report = [&](const State& st) {
    EnergyReport r = evaluate_report(st, params, o.mode, o.nonlinear.exec);
    if (obs.on_report) obs.on_report(st, r);
    res.reports.push_back(r);
    return r;
  };
  if (o.report_initial) report(s);

  while (s.step < total) {
    try {
      s = lin ? lin->step(s, LinearForcing{}) : nl->step(s);
    } catch (const DiffeoError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
    } catch (const ConvergenceError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
    }
    if (res.aborted) break;
    if (s.step % o.diagnostics_every == 0 || s.step == total) {
      const EnergyReport r = report(s);
      if (!std::isfinite(r.E) || !std::isfinite(r.base_energy)) {
        res.aborted = true;
        res.abort_reason = "energy is no longer finite";
        break;
      }
    }
    if (o.snapshot_every > 0 && s.step % o.snapshot_every == 0 && obs.on_snapshot) obs.on_snapshot(s);
  }
  if (res.aborted && obs.on_snapshot) obs.on_snapshot(s);
  res.final = std::move(s);
  return res;
}

}  // namespace siw
