#include "siw/stability.hpp"

#include "siw/mode_system.hpp"
#include "siw/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace siw {

double critical_sigma(const FluidParams& p) { return p.critical_sigma(); }

CoercivityResult coercivity_check(const SurfaceField& eta, const FluidParams& p) {
  const Grid& g = *eta.grid();
  const double scale = std::max(1.0, eta.coeffs().abs().maxCoeff());
  if (std::abs(eta[g.mode_index(0, 0)]) > 1e-12 * scale)
    throw InvalidArgument("coercivity_check: eta must have zero mean");
  double l2 = 0.0, grad = 0.0;
  for (int m = 0; m < g.nmodes(); ++m) {
    l2 += std::norm(eta[m]);
    grad += g.nabs2(m) * std::norm(eta[m]);
  }
  l2 *= g.area();
  grad *= g.area();
  CoercivityResult r;
  r.lhs = p.sigma_minus * grad - p.density_jump() * p.g * l2;
  r.rhs = p.density_jump() > 0.0 ? (p.sigma_minus - p.critical_sigma()) * grad : p.sigma_minus * grad;
  r.margin = r.lhs - r.rhs;
  return r;
}

std::vector<Wavenumber> mode_set(int kmax) {
  std::vector<Wavenumber> out;
  for (int k2 = 0; k2 <= kmax; ++k2)
    for (int k1 = -kmax; k1 <= kmax; ++k1) {
      if (k2 == 0 && k1 <= 0) continue;
      if (k1 * k1 + k2 * k2 <= kmax * kmax) out.push_back({k1, k2});
    }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Stable:
      return "stable";
    case Verdict::Marginal:
      return "marginal";
    case Verdict::Unstable:
      return "unstable";
  }
  return "?";
}

namespace {

// Generalized eigenproblem A x = lambda B x of the linearized single-mode
// system, assembled from scratch in a rotated real frame: the horizontal
// velocity is split into i a along n and v across it, so every coefficient is
// real. Unknowns per layer: a, v, w, p on every node, then eta_+ and eta_-.
cplx dense_rate(const Wavenumber& n, const FluidParams& p, const RateOptions& o) {
  const VerticalGrid vg(o.nz, o.nz, p.b0);
  const double n1 = n.k1 / p.L1, n2 = n.k2 / p.L2;
  const double k2 = n1 * n1 + n2 * n2, k = std::sqrt(k2);
  const int nu = vg.upper.size(), nl = vg.lower.size();
  const int size = 4 * (nu + nl) + 2;
  const int eta_top = 4 * (nu + nl), eta_int = eta_top + 1;
  const double st = o.surface_tension ? 1.0 : 0.0;
  const double c_top = p.rho_plus * p.g + st * p.sigma_plus * k2;
  const double c_int = p.density_jump() * p.g - st * p.sigma_minus * k2;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(size, size), B = Eigen::MatrixXd::Zero(size, size);
  auto idx = [&](Layer l, int var, int j) { return (l == Layer::Upper ? 0 : 4 * nu) + var * (l == Layer::Upper ? nu : nl) + j; };

  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const ChebLayer& cl = vg.layer(l);
    const int N = cl.size();
    const Eigen::MatrixXd& D = cl.D(1);
    const Eigen::MatrixXd& D2 = cl.D(2);
    const double mu = p.mu(l), rho = p.rho(l);
    for (int j = 1; j < N - 1; ++j) {
      for (int var = 0; var < 3; ++var) {
        const int r = idx(l, var, j);
        for (int c = 0; c < N; ++c) A(r, idx(l, var, c)) += mu * D2(j, c);
        A(r, idx(l, var, j)) -= mu * k2;
        B(r, idx(l, var, j)) = rho;
      }
      A(idx(l, 0, j), idx(l, 3, j)) -= k;
      for (int c = 0; c < N; ++c) A(idx(l, 2, j), idx(l, 3, c)) -= D(j, c);
    }
    for (int j = 0; j < N; ++j) {
      const int r = idx(l, 3, j);
      A(r, idx(l, 0, j)) = -k;
      for (int c = 0; c < N; ++c) A(r, idx(l, 2, c)) += D(j, c);
    }
  }

  const Eigen::MatrixXd& Du = vg.upper.D(1);
  const Eigen::MatrixXd& Dl = vg.lower.D(1);
  const Layer U = Layer::Upper, L = Layer::Lower;
  // free top surface
  for (int c = 0; c < nu; ++c) {
    A(idx(U, 0, 0), idx(U, 0, c)) += Du(0, c);
    A(idx(U, 1, 0), idx(U, 1, c)) += Du(0, c);
    A(idx(U, 2, 0), idx(U, 2, c)) -= 2.0 * p.mu_plus * Du(0, c);
  }
  A(idx(U, 0, 0), idx(U, 2, 0)) += k;
  A(idx(U, 2, 0), idx(U, 3, 0)) += 1.0;
  A(idx(U, 2, 0), eta_top) -= c_top;
  // interface
  for (int var = 0; var < 3; ++var) {
    A(idx(U, var, nu - 1), idx(U, var, nu - 1)) = 1.0;
    A(idx(U, var, nu - 1), idx(L, var, 0)) = -1.0;
  }
  for (int c = 0; c < nu; ++c) {
    A(idx(L, 0, 0), idx(U, 0, c)) += p.mu_plus * Du(nu - 1, c);
    A(idx(L, 1, 0), idx(U, 1, c)) += p.mu_plus * Du(nu - 1, c);
    A(idx(L, 2, 0), idx(U, 2, c)) -= 2.0 * p.mu_plus * Du(nu - 1, c);
  }
  for (int c = 0; c < nl; ++c) {
    A(idx(L, 0, 0), idx(L, 0, c)) -= p.mu_minus * Dl(0, c);
    A(idx(L, 1, 0), idx(L, 1, c)) -= p.mu_minus * Dl(0, c);
    A(idx(L, 2, 0), idx(L, 2, c)) += 2.0 * p.mu_minus * Dl(0, c);
  }
  A(idx(L, 0, 0), idx(U, 2, nu - 1)) += p.mu_plus * k;
  A(idx(L, 0, 0), idx(L, 2, 0)) -= p.mu_minus * k;
  A(idx(L, 2, 0), idx(U, 3, nu - 1)) += 1.0;
  A(idx(L, 2, 0), idx(L, 3, 0)) -= 1.0;
  A(idx(L, 2, 0), eta_int) -= c_int;
  // rigid bottom
  for (int var = 0; var < 3; ++var) A(idx(L, var, nl - 1), idx(L, var, nl - 1)) = 1.0;
  // kinematic rows
  A(eta_top, idx(U, 2, 0)) = 1.0;
  B(eta_top, eta_top) = 1.0;
  A(eta_int, idx(L, 2, 0)) = 1.0;
  B(eta_int, eta_int) = 1.0;

  // Row and column equilibration leaves the pencil's eigenvalues unchanged
  // and keeps QZ from stalling on the mixed scales of the boundary rows.
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int i = 0; i < size; ++i) {
      const double m = std::max(A.row(i).cwiseAbs().maxCoeff(), B.row(i).cwiseAbs().maxCoeff());
      if (m > 0.0) {
        A.row(i) /= m;
        B.row(i) /= m;
      }
    }
    for (int j = 0; j < size; ++j) {
      const double m = std::max(A.col(j).cwiseAbs().maxCoeff(), B.col(j).cwiseAbs().maxCoeff());
      if (m > 0.0) {
        A.col(j) /= m;
        B.col(j) /= m;
      }
    }
  }
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(A, B, false);
  if (ges.info() != Eigen::Success) throw SolverError("dense eigenvalue solver failed");
  const Eigen::VectorXcd alpha = ges.alphas();
  const Eigen::VectorXd beta = ges.betas();
  bool found = false;
  cplx best{0.0};
  for (int i = 0; i < alpha.size(); ++i) {
    if (std::abs(beta[i]) <= 1e-13 * std::abs(alpha[i]) || beta[i] == 0.0) continue;
    const cplx lam = alpha[i] / beta[i];
    if (!std::isfinite(lam.real()) || std::abs(lam) > 1e8) continue;
    if (!found || lam.real() > best.real() || (lam.real() == best.real() && lam.imag() > best.imag())) {
      best = lam;
      found = true;
    }
  }
  if (!found) throw SolverError("dense eigenvalue solver returned no finite eigenvalue");
  // report the member of a conjugate pair with nonnegative imaginary part
  return cplx(best.real(), std::abs(best.imag()));
}

Eigen::VectorXcd random_state(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd x(size);
  for (int i = 0; i < size; ++i) {
    const double re = nd(rng);
    x[i] = cplx(re, nd(rng));
  }
  return x;
}

// Eigenvalues of the 2x2 Krylov Ritz problem: z ~ c0 x + c1 y with y = S x,
// z = S y. Returns the Ritz value of largest modulus, or the Rayleigh quotient
// when x and y are nearly parallel.
cplx ritz(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y, const Eigen::VectorXcd& z) {
  Eigen::MatrixXcd K(x.size(), 2);
  K.col(0) = x;
  K.col(1) = y;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(K, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto s = svd.singularValues();
  if (s[1] <= 1e-10 * s[0]) return x.dot(y) / x.squaredNorm();
  const Eigen::Vector2cd c = svd.solve(z);
  // mu^2 - c1 mu - c0 = 0
  const cplx disc = std::sqrt(c[1] * c[1] + 4.0 * c[0]);
  const cplx m1 = 0.5 * (c[1] + disc), m2 = 0.5 * (c[1] - disc);
  return std::abs(m1) >= std::abs(m2) ? m1 : m2;
}

std::uint64_t mode_seed(std::uint64_t seed, const Wavenumber& n) {
  return seed ^ (std::uint64_t(std::uint32_t(n.k1)) * 0x9E3779B97F4A7C15ull) ^
         (std::uint64_t(std::uint32_t(n.k2)) * 0xC2B2AE3D27D4EB4Full);
}

RateResult power_rate(const Wavenumber& n, const FluidParams& p, const RateOptions& o, int nz_minus = 0,
                      Eigen::VectorXcd* vector = nullptr) {
  const VerticalGrid vg(o.nz, nz_minus > 0 ? nz_minus : o.nz, p.b0);
  const double n1 = n.k1 / p.L1, n2 = n.k2 / p.L2;
  RateResult r;

  // Phase 1: backward Euler with a moderate step, rightmost eigenvalue from the
  // dominant Ritz value mu = 1 / (1 - lambda dt).
  const double dt0 = 0.1;
  const ModeStepper S(vg, p, n1, n2, dt0, o.surface_tension);
  Eigen::VectorXcd x = S.step(random_state(S.state_size(), mode_seed(o.seed, n)));
  x.normalize();
  Eigen::VectorXcd y = S.step(x);
  cplx lambda{0.0}, prev{0.0};
  double change = 0.0;
  const int phase1_cap = std::min(400, o.max_steps);
  for (int k = 0; k < phase1_cap; ++k) {
    const Eigen::VectorXcd z = S.step(y);
    const cplx mu = ritz(x, y, z);
    prev = lambda;
    lambda = (1.0 - 1.0 / mu) / dt0;
    change = std::abs(lambda - prev);
    ++r.steps;
    const double ny = y.norm();
    x = y / ny;
    y = z / ny;
    if (k > 2 && change < 1e-4 * std::max(1.0, std::abs(lambda))) break;
  }

  // Phase 2: shifted inverse iteration, the step with dt = 1/s applies
  // s (s M - L)^{-1} M.
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double delta = std::max(1e-4, 1e-3 * std::abs(lambda));
    cplx s = lambda + delta;
    if (std::abs(s) < delta) s += delta;
    const ModeStepper T(vg, p, n1, n2, 1.0 / s, o.surface_tension);
    Eigen::VectorXcd v = x;
    prev = lambda;
    bool converged = false;
    for (int k = 0; k < 60 && r.steps < o.max_steps; ++k) {
      const Eigen::VectorXcd w = T.step(v);
      const cplx mu = v.dot(w) / v.squaredNorm();
      const cplx next = s * (1.0 - 1.0 / mu);
      change = std::abs(next - lambda);
      prev = lambda;
      lambda = next;
      ++r.steps;
      v = w / w.norm();
      if (change < o.tol * std::max(1.0, std::abs(lambda))) {
        converged = true;
        break;
      }
    }
    x = v;
    if (converged) {
      if (vector) *vector = v;
      r.lambda = cplx(lambda.real(), std::abs(lambda.imag()));
      r.last_change = change;
      return r;
    }
    if (r.steps >= o.max_steps) break;
  }
  std::ostringstream os;
  os << "power iteration for n = (" << n.k1 << ", " << n.k2 << ") did not converge in " << r.steps
     << " steps (last estimates " << prev << ", " << lambda << ")";
  throw ConvergenceError(os.str());
}

}  // namespace

RateResult mode_rate(const Wavenumber& n, const FluidParams& p, RateMethod method, const RateOptions& o) {
  if (n.k1 == 0 && n.k2 == 0) throw InvalidArgument("growth rate needs a nonzero wavenumber");
  if (o.nz < 8) throw InvalidArgument("growth rate needs at least 8 nodes per layer");
  if (method == RateMethod::Dense) {
    RateResult r;
    r.lambda = dense_rate(n, p, o);
    return r;
  }
  return power_rate(n, p, o);
}

Eigenmode linear_eigenmode(const GridPtr& g, const Wavenumber& n, const FluidParams& p, bool surface_tension,
                           double amplitude, std::uint64_t seed) {
  if (std::abs(n.k1) > g->cutoff1() || std::abs(n.k2) > g->cutoff2())
    throw InvalidArgument("eigenmode wavenumber lies outside the resolved band");
  RateOptions o;
  o.nz = g->nz(Layer::Upper);
  o.surface_tension = surface_tension;
  o.seed = seed;
  if (n.k1 == 0 && n.k2 == 0) throw InvalidArgument("eigenmode needs a nonzero wavenumber");
  Eigen::VectorXcd v;
  const RateResult r = power_rate(n, p, o, g->nz(Layer::Lower), &v);

  const int nu = g->nz(Layer::Upper), nl = g->nz(Layer::Lower);
  const int ntop = 3 * (nu + nl);
  const cplx et = v[ntop], ei = v[ntop + 1];
  const cplx lead = std::abs(et) >= std::abs(ei) ? et : ei;
  if (std::abs(lead) == 0.0) throw SolverError("eigenmode has no surface displacement");
  // real, positive leading coefficient; cosine amplitude 2|c| = amplitude
  const cplx scale = 0.5 * amplitude * std::abs(lead) / lead / std::abs(lead);

  Eigenmode e;
  e.lambda = r.lambda;
  e.u = make_vector(g, Jump::Continuous);
  e.eta_plus = SurfaceField(g);
  e.eta_minus = SurfaceField(g);
  const int m = g->mode_index(n.k1, n.k2), mc = g->conj_index(m);
  auto put = [&](cplx& a, cplx& b, cplx val) {
    a = val;
    b = std::conj(val);
  };
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const int off = l == Layer::Upper ? 0 : 3 * nu;
    const int N = g->nz(l);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < N; ++j) put(e.u[i].at(l, j, m), e.u[i].at(l, j, mc), scale * v[off + i * N + j]);
  }
  put(e.eta_plus[m], e.eta_plus[mc], scale * et);
  put(e.eta_minus[m], e.eta_minus[mc], scale * ei);
  return e;
}

StabilityReport stability_report(const FluidParams& p, const std::vector<Wavenumber>& modes, RateMethod method,
                                 const RateOptions& o, double rate_tol, Exec exec) {
  StabilityReport rep;
  rep.sigma_minus = p.sigma_minus;
  rep.sigma_c = p.critical_sigma();
  rep.rates.resize(modes.size());
  parallel_for(std::ptrdiff_t(modes.size()), exec, [&](std::ptrdiff_t i) {
    rep.rates[i] = {modes[i], mode_rate(modes[i], p, method, o).lambda};
  });
  rep.max_rate = -HUGE_VAL;
  for (const ModeRate& m : rep.rates) rep.max_rate = std::max(rep.max_rate, m.lambda.real());
  if (rep.rates.empty()) rep.max_rate = 0.0;
  rep.verdict = rep.max_rate > rate_tol ? Verdict::Unstable
                : rep.max_rate < -rate_tol ? Verdict::Stable
                                           : Verdict::Marginal;
  return rep;
}

ThresholdScan rt_threshold_scan(const FluidParams& p, double lo, double hi, const std::vector<Wavenumber>& modes,
                                RateMethod method, const RateOptions& o, double rel_tol, Exec exec) {
  ThresholdScan scan;
  scan.sigma_c = p.critical_sigma();
  if (p.density_jump() <= 0.0) {
    scan.inactive = true;
    return scan;
  }
  if (!(lo >= 0.0 && hi > lo)) throw InvalidArgument("threshold scan needs 0 <= lo < hi");
  auto eval = [&](double sigma) {
    FluidParams q = p;
    q.sigma_minus = sigma;
    scan.samples.push_back(stability_report(q, modes, method, o, 1e-8, exec));
    return scan.samples.back();
  };
  const StabilityReport a = eval(lo), b = eval(hi);
  scan.lo = lo;
  scan.hi = hi;
  scan.bracketed = a.verdict == Verdict::Unstable && b.verdict == Verdict::Stable;
  if (!scan.bracketed) return scan;
  while (scan.hi - scan.lo > rel_tol * scan.sigma_c && scan.iterations < 200) {
    const double mid = 0.5 * (scan.lo + scan.hi);
    const StabilityReport m = eval(mid);
    ++scan.iterations;
    if (m.verdict == Verdict::Marginal) {
      scan.lo = scan.hi = mid;
      break;
    }
    (m.verdict == Verdict::Unstable ? scan.lo : scan.hi) = mid;
  }
  scan.crossing = 0.5 * (scan.lo + scan.hi);
  return scan;
}

}  // namespace siw
