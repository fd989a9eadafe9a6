#pragma once
// Test-side reference evaluations. Nothing here calls into the solver
// kernels beyond field construction and transforms.

#include "siw/fields.hpp"
#include "siw/params.hpp"
#include "siw/stokes.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using namespace siw;

inline FluidParams heavy_over_light() {
  FluidParams p;
  p.rho_plus = 2.0;
  p.rho_minus = 1.0;
  p.mu_plus = 1.0;
  p.mu_minus = 1.0;
  p.g = 1.0;
  p.sigma_plus = 1.0;
  p.sigma_minus = 1.0;
  return p;
}

inline FluidParams light_over_heavy() {
  FluidParams p = heavy_over_light();
  p.rho_plus = 1.0;
  p.rho_minus = 2.0;
  return p;
}

inline FluidParams uneven() {
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

// least-squares slope of log y against log x
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = int(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Real field with random coefficients on 0 < |k| <= kmax.
inline SurfaceField random_surface(const GridPtr& g, int kmax, double amplitude, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SurfaceField f(g);
  for (int m = 0; m < g->nmodes(); ++m) {
    const int k1 = g->k1(m), k2 = g->k2(m);
    const bool canonical = k2 > 0 || (k2 == 0 && k1 > 0);
    if (!canonical || k1 * k1 + k2 * k2 > kmax * kmax || !g->in_band(m)) continue;
    const double re = nd(rng);
    f[m] = amplitude * cplx(re, nd(rng));
    f[g->conj_index(m)] = std::conj(f[m]);
  }
  return f;
}

// Samples a function of (x1, x2, x3) on the collocation points of one layer.
inline Eigen::ArrayXd sample_layer(const Grid& g, Layer l, const std::function<double(double, double, double)>& f) {
  const int nm = g.nmodes();
  const auto& z = g.layer(l).z();
  Eigen::ArrayXd out(z.size() * nm);
  for (int j = 0; j < z.size(); ++j)
    for (int i1 = 0; i1 < g.N1(); ++i1)
      for (int i2 = 0; i2 < g.N2(); ++i2) out[j * nm + i1 * g.N2() + i2] = f(g.x1(i1), g.x2(i2), z[j]);
  return out;
}

inline Vol sample(const Grid& g, const std::function<double(double, double, double)>& up,
                  const std::function<double(double, double, double)>& lo) {
  return {sample_layer(g, Layer::Upper, up), sample_layer(g, Layer::Lower, lo)};
}

inline Eigen::ArrayXd sample_surface(const Grid& g, const std::function<double(double, double)>& f) {
  Eigen::ArrayXd out(g.nmodes());
  for (int i1 = 0; i1 < g.N1(); ++i1)
    for (int i2 = 0; i2 < g.N2(); ++i2) out[i1 * g.N2() + i2] = f(g.x1(i1), g.x2(i2));
  return out;
}

// Manufactured two-phase Stokes flow on L1 = L2 = 1 with phase psi = x1 + x2:
//   u1 = u2 = -W'(z) sin(psi) / 2, u3 = W(z) cos(psi),
//   W = (z + b)^2 (1 - z / 4)^2 e^{z / 2},
// divergence free, continuous, zero at the bottom, and
//   p+ = (1 + z^2) cos(psi),  p- = e^{-z} cos(psi).
// Derivatives of W are exact (Leibniz rule on the polynomial factor).
struct Manufactured {
  double b;
  FluidParams prm;

  // W^(k) by expanding the polynomial factor and the exponential
  double W(double z, int k) const {
    // q(z) = (z + b)^2 (1 - z/4)^2 as a polynomial, derivatives by Horner
    auto q = [this](double x, int d) {
      // coefficients of (z + b)(1 - z/4) = b + (1 - b/4) z - z^2/4, squared
      const double a0 = b, a1 = 1.0 - b / 4.0, a2 = -0.25;
      const double c[5] = {a0 * a0, 2 * a0 * a1, a1 * a1 + 2 * a0 * a2, 2 * a1 * a2, a2 * a2};
      double s = 0.0;
      for (int i = d; i < 5; ++i) {
        double f = 1.0;
        for (int r = 0; r < d; ++r) f *= double(i - r);
        s += c[i] * f * std::pow(x, i - d);
      }
      return s;
    };
    // (q e^{z/2})^(k) = sum_j C(k,j) q^(j) (1/2)^(k-j) e^{z/2}
    static const int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    double s = 0.0;
    for (int j = 0; j <= k; ++j) s += binom[k][j] * q(z, j) * std::pow(0.5, k - j);
    return s * std::exp(0.5 * z);
  }
  double P(Layer l, double z, int k) const {
    if (l == Layer::Upper) return k == 0 ? 1.0 + z * z : k == 1 ? 2.0 * z : 2.0;
    return (k % 2 ? -1.0 : 1.0) * std::exp(-z);
  }

  // horizontal Laplacian of the phase functions is -2
  double u_h(double x1, double x2, double z) const { return -0.5 * W(z, 1) * std::sin(x1 + x2); }
  double u_3(double x1, double x2, double z) const { return W(z, 0) * std::cos(x1 + x2); }
  double p(Layer l, double x1, double x2, double z) const { return P(l, z, 0) * std::cos(x1 + x2); }

  // F1 = -mu Lap u + grad p
  double F_h(Layer l, double x1, double x2, double z) const {
    const double lap = -0.5 * (W(z, 3) - 2.0 * W(z, 1));
    return -prm.mu(l) * lap * std::sin(x1 + x2) - P(l, z, 0) * std::sin(x1 + x2);
  }
  double F_3(Layer l, double x1, double x2, double z) const {
    const double lap = W(z, 2) - 2.0 * W(z, 0);
    return (-prm.mu(l) * lap + P(l, z, 1)) * std::cos(x1 + x2);
  }
  // (p I - mu Du) e3: horizontal component -mu (d3 u_h + d_h u3), vertical p - 2 mu d3 u3
  double T_h(Layer l, double x1, double x2, double z) const {
    return -prm.mu(l) * (-0.5 * W(z, 2) - W(z, 0)) * std::sin(x1 + x2);
  }
  double T_3(Layer l, double x1, double x2, double z) const {
    return (P(l, z, 0) - 2.0 * prm.mu(l) * W(z, 1)) * std::cos(x1 + x2);
  }

  StokesData data(const GridPtr& g) const {
    const Grid& G = *g;
    auto vol = [&](auto fu, auto fl) {
      return LayeredField::from_physical(g, sample(G, fu, fl), Jump::Discontinuous);
    };
    StokesData d;
    auto fh = [&](Layer l) { return [this, l](double a, double b2, double z) { return F_h(l, a, b2, z); }; };
    auto f3 = [&](Layer l) { return [this, l](double a, double b2, double z) { return F_3(l, a, b2, z); }; };
    d.F1 = {vol(fh(Layer::Upper), fh(Layer::Lower)), vol(fh(Layer::Upper), fh(Layer::Lower)),
            vol(f3(Layer::Upper), f3(Layer::Lower))};
    auto surf = [&](auto f) { return SurfaceField::from_physical(g, sample_surface(G, f)); };
    auto top_h = [this](double a, double b2) { return T_h(Layer::Upper, a, b2, 1.0); };
    auto top_3 = [this](double a, double b2) { return T_3(Layer::Upper, a, b2, 1.0); };
    auto jump_h = [this](double a, double b2) { return T_h(Layer::Lower, a, b2, 0.0) - T_h(Layer::Upper, a, b2, 0.0); };
    auto jump_3 = [this](double a, double b2) { return T_3(Layer::Lower, a, b2, 0.0) - T_3(Layer::Upper, a, b2, 0.0); };
    d.F3plus = {surf(top_h), surf(top_h), surf(top_3)};
    d.F3minus = {surf(jump_h), surf(jump_h), surf(jump_3)};
    return d;
  }

  // max nodal error of a computed solution
  double error(const StokesSolution& s) const {
    const Grid& G = *s.p.grid();
    auto uh = [this](double a, double b2, double z) { return u_h(a, b2, z); };
    auto u3 = [this](double a, double b2, double z) { return u_3(a, b2, z); };
    auto pu = [this](double a, double b2, double z) { return p(Layer::Upper, a, b2, z); };
    auto pl = [this](double a, double b2, double z) { return p(Layer::Lower, a, b2, z); };
    const Vol eh = sample(G, uh, uh), e3 = sample(G, u3, u3), ep = sample(G, pu, pl);
    return std::max({(s.u[0].physical() - eh).max_abs(), (s.u[1].physical() - eh).max_abs(),
                     (s.u[2].physical() - e3).max_abs(), (s.p.physical() - ep).max_abs()});
  }
};

}  // namespace oracle
