#include "siw/diagnostics.hpp"

#include "siw/norms.hpp"

#include <cmath>

namespace siw {

namespace {

LayeredField laplacian(const LayeredField& f) { return f.d(0).d(0) + f.d(1).d(1) + f.d3(2); }

void scale_layers(LayeredField& f, double up, double lo) {
  f.layer(Layer::Upper) *= up;
  f.layer(Layer::Lower) *= lo;
}

// int over one layer of |f|^2
double layer_l2_sq(const LayeredField& f, Layer l) {
  const Grid& g = *f.grid();
  const int nm = g.nmodes();
  const auto& w = g.layer(l).weights();
  double acc = 0.0;
  for (int j = 0; j < g.nz(l); ++j) acc += w[j] * f.layer(l).segment(j * nm, nm).abs2().sum();
  return g.area() * acc;
}

double surface_l2_sq(const SurfaceField& f) { return sobolev_norm_sq_surface(f, 0.0); }

double surface_grad_sq(const SurfaceField& f) {
  const Grid& g = *f.grid();
  double acc = 0.0;
  for (int m = 0; m < g.nmodes(); ++m) acc += g.nabs2(m) * std::norm(f[m]);
  return g.area() * acc;
}

struct TimeDerivatives {
  VectorField dtu;
  LayeredField dtp;
  SurfaceField dteta[2], ddteta[2];
  bool dtu_linearized = false, dtp_missing = false, ddteta_linearized = false;
};

const VectorField* momentum_forcing(const State& s, Mode mode) {
  if (!s.forcing) return nullptr;
  const VectorField& F = mode == Mode::SurfaceTension ? s.forcing->f : s.forcing->G1;
  return F[0].valid() ? &F : nullptr;
}

SurfaceField product_sum(const SurfaceField& a1, const SurfaceField& b1, const SurfaceField& a2,
                         const SurfaceField& b2) {
  const Eigen::ArrayXd v = a1.physical() * b1.physical() + a2.physical() * b2.physical();
  return SurfaceField::from_physical(a1.grid(), v);
}

TimeDerivatives time_derivatives(const State& s, const FluidParams& params, Mode mode) {
  const GridPtr& g = s.grid();
  const int nu = g->nz(Layer::Upper);
  TimeDerivatives td;

  // rho dt u = mu Lap u - grad p + F
  const VectorField* F = momentum_forcing(s, mode);
  td.dtu_linearized = F == nullptr;
  for (int i = 0; i < 3; ++i) {
    LayeredField a = laplacian(s.u[i]);
    scale_layers(a, params.mu_plus, params.mu_minus);
    a -= s.p.d(i);
    if (F) a += (*F)[i];
    scale_layers(a, 1.0 / params.rho_plus, 1.0 / params.rho_minus);
    a.set_jump(Jump::Discontinuous);
    td.dtu[i] = std::move(a);
  }

  if (s.p_prev.valid() && s.dt_prev > 0.0) {
    td.dtp = (1.0 / s.dt_prev) * (s.p - s.p_prev);
  } else {
    td.dtp = LayeredField(g, Jump::Discontinuous);
    td.dtp_missing = true;
  }

  const SurfaceField u3[2] = {s.u[2].slice(Layer::Upper, 0), s.u[2].slice(Layer::Upper, nu - 1)};
  const SurfaceField a3[2] = {td.dtu[2].slice(Layer::Upper, 0), td.dtu[2].slice(Layer::Upper, nu - 1)};
  const SurfaceField* eta[2] = {&s.eta_plus, &s.eta_minus};
  const bool kinematic_terms = mode == Mode::NoSurfaceTension;
  td.ddteta_linearized = kinematic_terms && F == nullptr;
  for (int k = 0; k < 2; ++k) {
    const int node = k == 0 ? 0 : nu - 1;
    td.dteta[k] = u3[k];
    td.ddteta[k] = a3[k];
    if (kinematic_terms && F) {
      // G4 = -u_h . grad eta and its time derivative
      const SurfaceField u1 = s.u[0].slice(Layer::Upper, node), u2 = s.u[1].slice(Layer::Upper, node);
      const SurfaceField e1 = eta[k]->d(0), e2 = eta[k]->d(1);
      td.dteta[k] -= product_sum(u1, e1, u2, e2);
      const SurfaceField a1 = td.dtu[0].slice(Layer::Upper, node), a2 = td.dtu[1].slice(Layer::Upper, node);
      td.ddteta[k] -= product_sum(a1, e1, a2, e2);
      td.ddteta[k] -= product_sum(u1, td.dteta[k].d(0), u2, td.dteta[k].d(1));
    }
  }
  return td;
}

// sum over the nine components of grad v traced at one layer node
double grad_trace_norm(const VectorField& v, Layer l, int node, double s) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int dir = 0; dir < 3; ++dir) acc += sobolev_norm_sq_surface(v[i].d(dir).slice(l, node), s);
  return acc;
}

double jump_grad_norm(const VectorField& v, const FluidParams& p, int nu, double s) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int dir = 0; dir < 3; ++dir) {
      const LayeredField d = v[i].d(dir);
      const SurfaceField j = p.mu_plus * d.slice(Layer::Upper, nu - 1) - p.mu_minus * d.slice(Layer::Lower, 0);
      acc += sobolev_norm_sq_surface(j, s);
    }
  return acc;
}

void fill_base(EnergyReport& r, const State& s, const FluidParams& params) {
  r.base_energy = base_energy(s, params, false);
  r.base_energy_st = base_energy(s, params, true);
  r.base_dissipation = base_dissipation(s.u, params);
}

}  // namespace

const std::vector<std::string>& energy_report_columns() {
  static const std::vector<std::string> cols = {
      "step",          "t",           "E",           "u_h2",         "dtu_l2",       "p_h1",
      "eta_h3",        "dteta_h32",   "ddteta_hm12", "D",            "u_h3",         "dtu_h1",
      "grad_dtu_top",  "jump_mu_grad_dtu", "p_h2",   "dtp_l2",       "dtp_top",      "jump_dtp",
      "eta_h72",       "dteta_h52",   "ddteta_h12",  "base_energy",  "base_energy_st", "base_dissipation",
      "dtu_linearized", "dtp_missing", "ddteta_linearized"};
  return cols;
}

std::vector<double> energy_report_values(const EnergyReport& r) {
  return {double(r.step), r.t,        r.E,         r.u_h2,     r.dtu_l2,     r.p_h1,
          r.eta_h3,       r.dteta_h32, r.ddteta_hm12, r.D,       r.u_h3,       r.dtu_h1,
          r.grad_dtu_top, r.jump_mu_grad_dtu, r.p_h2, r.dtp_l2,  r.dtp_top,    r.jump_dtp,
          r.eta_h72,      r.dteta_h52, r.ddteta_h12, r.base_energy, r.base_energy_st, r.base_dissipation,
          double(r.dtu_linearized), double(r.dtp_missing), double(r.ddteta_linearized)};
}

double base_energy(const State& s, const FluidParams& params, bool with_surface_tension) {
  double kinetic = 0.0;
  for (int i = 0; i < 3; ++i)
    kinetic += params.rho_plus * layer_l2_sq(s.u[i], Layer::Upper) +
               params.rho_minus * layer_l2_sq(s.u[i], Layer::Lower);
  double e = 0.5 * kinetic + 0.5 * params.rho_plus * params.g * surface_l2_sq(s.eta_plus) -
             0.5 * params.density_jump() * params.g * surface_l2_sq(s.eta_minus);
  if (with_surface_tension)
    e += 0.5 * params.sigma_plus * surface_grad_sq(s.eta_plus) +
         0.5 * params.sigma_minus * surface_grad_sq(s.eta_minus);
  return e;
}

double base_dissipation(const VectorField& u, const FluidParams& params) {
  std::array<std::array<LayeredField, 3>, 3> du;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) du[i][k] = u[i].d(k);
  double acc = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const LayeredField sym = du[i][k] + du[k][i];
      acc += params.mu_plus * layer_l2_sq(sym, Layer::Upper) + params.mu_minus * layer_l2_sq(sym, Layer::Lower);
    }
  return 0.5 * acc;
}

EnergyReport energy(const State& s, const FluidParams& params, Mode mode, Exec) {
  EnergyReport r;
  r.t = s.t;
  r.step = s.step;
  const TimeDerivatives td = time_derivatives(s, params, mode);
  r.u_h2 = volume_norm_sq(s.u, 2);
  r.dtu_l2 = volume_norm_sq(td.dtu, 0);
  r.p_h1 = volume_norm_sq(s.p, 1);
  r.eta_h3 = sobolev_norm_sq_surface(s.eta_plus, 3) + sobolev_norm_sq_surface(s.eta_minus, 3);
  r.dteta_h32 = sobolev_norm_sq_surface(td.dteta[0], 1.5) + sobolev_norm_sq_surface(td.dteta[1], 1.5);
  r.ddteta_hm12 = sobolev_norm_sq_surface(td.ddteta[0], -0.5) + sobolev_norm_sq_surface(td.ddteta[1], -0.5);
  r.E = r.u_h2 + r.dtu_l2 + r.p_h1 + r.eta_h3 + r.dteta_h32 + r.ddteta_hm12;
  r.dtu_linearized = td.dtu_linearized;
  r.dtp_missing = td.dtp_missing;
  r.ddteta_linearized = td.ddteta_linearized;
  fill_base(r, s, params);
  return r;
}

EnergyReport dissipation(const State& s, const FluidParams& params, Mode mode, Exec) {
  EnergyReport r;
  r.t = s.t;
  r.step = s.step;
  const TimeDerivatives td = time_derivatives(s, params, mode);
  const int nu = s.grid()->nz(Layer::Upper);
  r.u_h3 = volume_norm_sq(s.u, 3);
  r.dtu_h1 = volume_norm_sq(td.dtu, 1);
  r.grad_dtu_top = grad_trace_norm(td.dtu, Layer::Upper, 0, -0.5);
  r.jump_mu_grad_dtu = jump_grad_norm(td.dtu, params, nu, -0.5);
  r.p_h2 = volume_norm_sq(s.p, 2);
  r.dtp_l2 = volume_norm_sq(td.dtp, 0);
  r.dtp_top = sobolev_norm_sq_surface(td.dtp.slice(Layer::Upper, 0), -0.5);
  r.jump_dtp = sobolev_norm_sq_surface(td.dtp.slice(Layer::Upper, nu - 1) - td.dtp.slice(Layer::Lower, 0), -0.5);
  r.eta_h72 = sobolev_norm_sq_surface(s.eta_plus, 3.5) + sobolev_norm_sq_surface(s.eta_minus, 3.5);
  r.dteta_h52 = sobolev_norm_sq_surface(td.dteta[0], 2.5) + sobolev_norm_sq_surface(td.dteta[1], 2.5);
  r.ddteta_h12 = sobolev_norm_sq_surface(td.ddteta[0], 0.5) + sobolev_norm_sq_surface(td.ddteta[1], 0.5);
  r.D = r.u_h3 + r.dtu_h1 + r.grad_dtu_top + r.jump_mu_grad_dtu + r.p_h2 + r.dtp_l2 + r.dtp_top + r.jump_dtp +
        r.eta_h72 + r.dteta_h52 + r.ddteta_h12;
  r.dtu_linearized = td.dtu_linearized;
  r.dtp_missing = td.dtp_missing;
  r.ddteta_linearized = td.ddteta_linearized;
  fill_base(r, s, params);
  return r;
}

EnergyReport evaluate_report(const State& s, const FluidParams& params, Mode mode, Exec exec) {
  EnergyReport r = energy(s, params, mode, exec);
  const EnergyReport d = dissipation(s, params, mode, exec);
  r.u_h3 = d.u_h3;
  r.dtu_h1 = d.dtu_h1;
  r.grad_dtu_top = d.grad_dtu_top;
  r.jump_mu_grad_dtu = d.jump_mu_grad_dtu;
  r.p_h2 = d.p_h2;
  r.dtp_l2 = d.dtp_l2;
  r.dtp_top = d.dtp_top;
  r.jump_dtp = d.jump_dtp;
  r.eta_h72 = d.eta_h72;
  r.dteta_h52 = d.dteta_h52;
  r.ddteta_h12 = d.ddteta_h12;
  r.D = d.D;
  return r;
}

IdentityResidual energy_identity_residual(const std::vector<EnergyReport>& w, double dt, bool with_surface_tension) {
  if (!(dt > 0.0)) throw InvalidArgument("energy_identity_residual: dt must be positive");
  IdentityResidual out;
  for (std::size_t n = 0; n + 1 < w.size(); ++n) {
    const double b0 = with_surface_tension ? w[n].base_energy_st : w[n].base_energy;
    const double b1 = with_surface_tension ? w[n + 1].base_energy_st : w[n + 1].base_energy;
    const double r = (b1 - b0) / dt + w[n + 1].base_dissipation;
    out.residuals.push_back(r);
    out.max_abs = std::max(out.max_abs, std::abs(r));
  }
  return out;
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& e, DecayModel model, double trim) {
  if (t.size() != e.size()) throw InvalidArgument("fit_decay: t and E differ in length");
  if (!(trim >= 0.0 && trim < 1.0)) throw InvalidArgument("fit_decay: trim must lie in [0, 1)");
  for (double v : e)
    if (!(v > 0.0)) throw InvalidArgument("fit_decay: energy series must be strictly positive");
  const std::size_t first = std::size_t(std::floor(trim * double(t.size())));
  const std::size_t n = t.size() - first;
  if (n < 10) throw InvalidArgument("fit_decay: need at least 10 samples after trimming");

  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = t[first + i];
    if (model == DecayModel::Algebraic && !(ti > -1.0)) throw InvalidArgument("fit_decay: algebraic fit needs t > -1");
    X(i, 0) = 1.0;
    X(i, 1) = model == DecayModel::Exponential ? ti : std::log1p(ti);
    y[i] = std::log(e[first + i]);
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd res = y - X * c;
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  DecayFit f;
  f.model = model;
  f.log_c = c[0];
  f.rate = -c[1];
  f.r2 = ss_tot > 0.0 ? 1.0 - res.squaredNorm() / ss_tot : 1.0;
  f.samples = int(n);
  return f;
}

}  // namespace siw
