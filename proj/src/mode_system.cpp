#include "siw/mode_system.hpp"
#include "siw/parallel.hpp"

#include <sstream>

namespace siw {

Restoring restoring(const FluidParams& p, double nabs2, bool surface_tension) {
  const double st = surface_tension ? 1.0 : 0.0;
  return {p.rho_plus * p.g + st * p.sigma_plus * nabs2, p.density_jump() * p.g - st * p.sigma_minus * nabs2};
}

ModeCoeffs step_coeffs(const FluidParams& p, double nabs2, cplx dt, bool surface_tension) {
  ModeCoeffs c;
  c.mass_plus = p.rho_plus / dt;
  c.mass_minus = p.rho_minus / dt;
  if (nabs2 > 0.0) {
    const Restoring r = restoring(p, nabs2, surface_tension);
    c.kappa_top = dt * r.top;
    c.kappa_int = dt * r.interface;
  }
  return c;
}

Eigen::MatrixXcd assemble_mode_matrix(const VerticalGrid& vg, const FluidParams& p, double n1, double n2,
                                      const ModeCoeffs& c) {
  const ModeLayout L(vg);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L.size(), L.size());
  const double k2 = n1 * n1 + n2 * n2;
  const cplx in[2] = {cplx(0.0, n1), cplx(0.0, n2)};

  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const ChebLayer& cl = vg.layer(l);
    const int N = cl.size();
    const Eigen::MatrixXd& D = cl.D(1);
    const Eigen::MatrixXd& D2 = cl.D(2);
    const double mu = p.mu(l);
    const cplx mass = l == Layer::Upper ? c.mass_plus : c.mass_minus;
    auto at = [&](int var, int node) { return L.index(l, var, node); };

    auto momentum = [&](int i, int j, int row) {
      for (int k = 0; k < N; ++k) A(row, at(i, k)) -= mu * D2(j, k);
      A(row, at(i, j)) += mass + mu * k2;
      if (i < 2) {
        A(row, at(3, j)) += in[i];
      } else {
        for (int k = 0; k < N; ++k) A(row, at(3, k)) += D(j, k);
      }
    };
    for (int j = 1; j < N - 1; ++j)
      for (int i = 0; i < 3; ++i) momentum(i, j, at(i, j));

    for (int j = 0; j < N; ++j) {
      const int r = at(3, j);
      A(r, at(0, j)) += in[0];
      A(r, at(1, j)) += in[1];
      for (int k = 0; k < N; ++k) A(r, at(2, k)) += D(j, k);
    }
    // At n = 0 the divergence rows only see D u3, whose kernel (constants)
    // makes them rank deficient; the vertical momentum balance at the top node
    // of each layer takes the place of one of them.
    if (k2 == 0.0) {
      const int r = at(3, 0);
      A.row(r).setZero();
      momentum(2, 0, r);
    }
  }

  const ChebLayer& up = vg.upper;
  const ChebLayer& lo = vg.lower;
  const int nu = up.size(), nl = lo.size();
  const double mup = p.mu_plus, mum = p.mu_minus;
  auto U = [&](int var, int node) { return L.index(Layer::Upper, var, node); };
  auto W = [&](int var, int node) { return L.index(Layer::Lower, var, node); };

  // top surface: (p I - mu Du) e3 = data, with the elevation term on the normal row
  for (int i = 0; i < 2; ++i) {
    const int r = U(i, 0);
    for (int k = 0; k < nu; ++k) A(r, U(i, k)) -= mup * up.D(1)(0, k);
    A(r, U(2, 0)) -= mup * in[i];
  }
  {
    const int r = U(2, 0);
    A(r, U(3, 0)) += 1.0;
    for (int k = 0; k < nu; ++k) A(r, U(2, k)) -= 2.0 * mup * up.D(1)(0, k);
    A(r, U(2, 0)) -= c.kappa_top;
  }
  // interface: continuity on the upper slots, stress jump on the lower slots
  for (int i = 0; i < 3; ++i) {
    const int r = U(i, nu - 1);
    A(r, U(i, nu - 1)) += 1.0;
    A(r, W(i, 0)) -= 1.0;
  }
  for (int i = 0; i < 2; ++i) {
    const int r = W(i, 0);
    for (int k = 0; k < nu; ++k) A(r, U(i, k)) -= mup * up.D(1)(nu - 1, k);
    A(r, U(2, nu - 1)) -= mup * in[i];
    for (int k = 0; k < nl; ++k) A(r, W(i, k)) += mum * lo.D(1)(0, k);
    A(r, W(2, 0)) += mum * in[i];
  }
  {
    const int r = W(2, 0);
    A(r, U(3, nu - 1)) += 1.0;
    for (int k = 0; k < nu; ++k) A(r, U(2, k)) -= 2.0 * mup * up.D(1)(nu - 1, k);
    A(r, W(3, 0)) -= 1.0;
    for (int k = 0; k < nl; ++k) A(r, W(2, k)) += 2.0 * mum * lo.D(1)(0, k);
    A(r, W(2, 0)) -= c.kappa_int;
  }
  // no slip at the bottom
  for (int i = 0; i < 3; ++i) A(W(i, nl - 1), W(i, nl - 1)) = 1.0;
  return A;
}

Eigen::VectorXcd pack_rhs(const Grid& g, const ModeForcing& f, int m, const ModeStateTerms* extra) {
  const ModeLayout L(g.vertical());
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(L.size());
  const bool zero_mode = g.nabs2(m) == 0.0;
  const bool has_u_old = extra && extra->u_old;

  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const int N = g.nz(l);
    const cplx mass = extra ? (l == Layer::Upper ? extra->mass_plus : extra->mass_minus) : cplx(0.0);
    auto momentum = [&](int i, int j) {
      cplx v = f.F1[i].valid() ? f.F1[i].at(l, j, m) : cplx(0.0);
      if (has_u_old) v += mass * (*extra->u_old)[i].at(l, j, m);
      return v;
    };
    for (int j = 1; j < N - 1; ++j)
      for (int i = 0; i < 3; ++i) b[L.index(l, i, j)] = momentum(i, j);
    if (f.F2.valid())
      for (int j = 0; j < N; ++j) b[L.index(l, 3, j)] = f.F2.at(l, j, m);
    if (zero_mode) b[L.index(l, 3, 0)] = momentum(2, 0);
  }
  for (int i = 0; i < 3; ++i) {
    if (f.top[i].valid()) b[L.index(Layer::Upper, i, 0)] = f.top[i][m];
    if (f.jump[i].valid()) b[L.index(Layer::Lower, i, 0)] = -f.jump[i][m];
  }
  if (extra) {
    b[L.index(Layer::Upper, 2, 0)] += extra->top_normal;
    b[L.index(Layer::Lower, 2, 0)] += extra->int_normal;
  }
  return b;
}

void unpack_solution(const Grid& g, const Eigen::VectorXcd& x, int m, VectorField& u, LayeredField& p) {
  const ModeLayout L(g.vertical());
  const int mc = g.conj_index(m);
  for (Layer l : {Layer::Upper, Layer::Lower})
    for (int j = 0; j < g.nz(l); ++j) {
      for (int i = 0; i < 3; ++i) {
        const cplx v = x[L.index(l, i, j)];
        u[i].at(l, j, m) = v;
        if (mc != m) u[i].at(l, j, mc) = std::conj(v);
      }
      const cplx v = x[L.index(l, 3, j)];
      p.at(l, j, m) = v;
      if (mc != m) p.at(l, j, mc) = std::conj(v);
    }
}

ModeLUBank::ModeLUBank(GridPtr grid, Assemble assemble, Exec exec, bool cache, std::string context)
    : grid_(std::move(grid)), assemble_(std::move(assemble)), exec_(exec), cache_(cache), context_(std::move(context)) {
  const auto& modes = grid_->canonical_modes();
  position_.assign(grid_->nmodes(), -1);
  for (std::size_t i = 0; i < modes.size(); ++i) position_[modes[i]] = int(i);
  if (cache_) {
    lu_.resize(modes.size());
    parallel_for(std::ptrdiff_t(modes.size()), exec_, [&](std::ptrdiff_t i) { lu_[i] = factor(modes[i]); });
  }
}

Eigen::PartialPivLU<Eigen::MatrixXcd> ModeLUBank::factor(int mode) const {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(assemble_(mode));
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "singular mode system at n = (" << grid_->k1(mode) << ", " << grid_->k2(mode) << "), rcond " << rc;
    if (!context_.empty()) os << " [" << context_ << "]";
    throw SolverError(os.str());
  }
  return lu;
}

void ModeLUBank::solve_all(const Rhs& rhs, const Sink& sink) const {
  const auto& modes = grid_->canonical_modes();
  parallel_for(std::ptrdiff_t(modes.size()), exec_, [&](std::ptrdiff_t i) {
    const int m = modes[i];
    sink(m, solve(m, rhs(m)));
  });
}

Eigen::VectorXcd ModeLUBank::solve(int mode, const Eigen::VectorXcd& b) const {
  if (cache_) {
    const int pos = position_[mode];
    if (pos < 0) throw InvalidArgument("mode is not canonical");
    return lu_[pos].solve(b);
  }
  return factor(mode).solve(b);
}

ModeSolverBank::ModeSolverBank(GridPtr grid, const FluidParams& params, CoeffFn coeffs, Exec exec, bool cache,
                               std::string context)
    : grid_(grid),
      bank_(
          grid,
          [g = grid, params, coeffs = std::move(coeffs)](int m) {
            return assemble_mode_matrix(g->vertical(), params, g->n1(m), g->n2(m), coeffs(m));
          },
          exec, cache, std::move(context)) {}

void ModeSolverBank::solve(const ModeForcing& f, const std::function<const ModeStateTerms*(int)>& extra,
                           VectorField& u, LayeredField& p) const {
  const Grid& g = *grid_;
  u = make_vector(grid_, Jump::Continuous);
  p = LayeredField(grid_, Jump::Discontinuous);
  bank_.solve_all([&](int m) { return pack_rhs(g, f, m, extra ? extra(m) : nullptr); },
                  [&](int m, const Eigen::VectorXcd& x) { unpack_solution(g, x, m, u, p); });
}

ModeStepper::ModeStepper(const VerticalGrid& vg, const FluidParams& params, double n1, double n2, cplx dt,
                         bool surface_tension)
    : layout_(vg), params_(params), dt_(dt) {
  const double k2 = n1 * n1 + n2 * n2;
  zero_mode_ = k2 == 0.0;
  coeffs_ = step_coeffs(params, k2, dt, surface_tension);
  c_ = k2 > 0.0 ? restoring(params, k2, surface_tension) : Restoring{0.0, 0.0};
  lu_.compute(assemble_mode_matrix(vg, params, n1, n2, coeffs_));
  const double rc = lu_.rcond();
  if (!(rc > 1e-14)) {
    std::ostringstream os;
    os << "singular single-mode step matrix at n = (" << n1 << ", " << n2 << "), dt = " << dt << ", rcond " << rc;
    throw SolverError(os.str());
  }
}

Eigen::VectorXcd ModeStepper::step(const Eigen::VectorXcd& s) const {
  if (s.size() != state_size()) throw InvalidArgument("mode state has wrong size");
  const int nu = layout_.nz(Layer::Upper), nl = layout_.nz(Layer::Lower);
  auto sidx = [&](Layer l, int var, int node) { return (l == Layer::Upper ? 0 : 3 * nu) + var * layout_.nz(l) + node; };
  const int ntop = 3 * (nu + nl), nint = ntop + 1;

  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(layout_.size());
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const int N = layout_.nz(l);
    const cplx mass = l == Layer::Upper ? coeffs_.mass_plus : coeffs_.mass_minus;
    for (int j = 1; j < N - 1; ++j)
      for (int i = 0; i < 3; ++i) b[layout_.index(l, i, j)] = mass * s[sidx(l, i, j)];
    if (zero_mode_) b[layout_.index(l, 3, 0)] = mass * s[sidx(l, 2, 0)];
  }
  b[layout_.index(Layer::Upper, 2, 0)] += c_.top * s[ntop];
  b[layout_.index(Layer::Lower, 2, 0)] += c_.interface * s[nint];
  const Eigen::VectorXcd x = lu_.solve(b);

  Eigen::VectorXcd out(state_size());
  for (Layer l : {Layer::Upper, Layer::Lower})
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < layout_.nz(l); ++j) out[sidx(l, i, j)] = x[layout_.index(l, i, j)];
  out[ntop] = s[ntop] + dt_ * x[layout_.index(Layer::Upper, 2, 0)];
  out[nint] = s[nint] + dt_ * x[layout_.index(Layer::Lower, 2, 0)];
  return out;
}

Eigen::MatrixXcd assemble_scalar_matrix(const VerticalGrid& vg, double w_plus, double w_minus, double nabs2) {
  const ChebLayer& up = vg.upper;
  const ChebLayer& lo = vg.lower;
  const int nu = up.size(), nl = lo.size();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nu + nl, nu + nl);
  auto interior = [&](const ChebLayer& cl, int off, double w) {
    for (int j = 1; j < cl.size() - 1; ++j) {
      for (int k = 0; k < cl.size(); ++k) A(off + j, off + k) = cl.D(2)(j, k) / w;
      A(off + j, off + j) -= nabs2 / w;
    }
  };
  interior(up, 0, w_plus);
  interior(lo, nu, w_minus);
  A(0, 0) = 1.0;
  A(nu - 1, nu - 1) = 1.0;
  A(nu - 1, nu) = -1.0;
  for (int k = 0; k < nu; ++k) A(nu, k) += up.D(1)(nu - 1, k) / w_plus;
  for (int k = 0; k < nl; ++k) A(nu, nu + k) -= lo.D(1)(0, k) / w_minus;
  for (int k = 0; k < nl; ++k) A(nu + nl - 1, nu + k) = -lo.D(1)(nl - 1, k) / w_minus;
  return A;
}

Eigen::VectorXcd pack_scalar_rhs(const VerticalGrid& vg, const ScalarModeData& d) {
  const int nu = vg.upper.size(), nl = vg.lower.size();
  if (d.f1.size() != nu + nl) throw InvalidArgument("scalar forcing has wrong size");
  Eigen::VectorXcd b = d.f1;
  b[0] = d.top;
  b[nu - 1] = d.jump;
  b[nu] = d.flux_jump;
  b[nu + nl - 1] = d.bottom;
  return b;
}

}  // namespace siw
