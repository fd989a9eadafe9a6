#include <doctest.h>

#include "oracles.hpp"
#include "siw/geometry.hpp"
#include "siw/nonlinear.hpp"

using namespace siw;

namespace {

GridPtr grid(int N = 8, int nz = 10) { return Grid::make(1.0, 1.0, N, N, nz, nz, 1.0); }

GeometryCache flat(const GridPtr& g, const FluidParams& p) {
  return build_geometry(SurfaceField(g), SurfaceField(g), SurfaceField(g), SurfaceField(g), p, default_extension());
}

// u = (z cos x2, sin x1, 0) in both layers
VectorField shear_flow(const GridPtr& g) {
  VectorField u = make_vector(g);
  auto a = [](double, double x2, double z) { return z * std::cos(x2); };
  auto b = [](double x1, double, double) { return std::sin(x1); };
  u[0] = LayeredField::from_physical(g, oracle::sample(*g, a, a));
  u[1] = LayeredField::from_physical(g, oracle::sample(*g, b, b));
  u[2] = LayeredField(g);
  return u;
}

double max_abs(const SurfaceVector& v) {
  double m = 0.0;
  for (const auto& s : v)
    if (s.valid()) m = std::max(m, s.physical().abs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("flat surfaces: only convection survives in f") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  const VectorField u = shear_flow(g);
  LayeredField p = LayeredField::from_physical(
      g, oracle::sample(*g, [](double x1, double, double z) { return z * std::cos(x1); },
                        [](double, double x2, double z) { return std::exp(z) * std::sin(x2); }),
      Jump::Discontinuous);
  const GeometryCache c = flat(g, prm);

  const VectorField f = forcing_f(u, p, c, prm);
  // -rho (u . grad) u
  auto conv1 = [](double x1, double x2, double z) { return -std::sin(x1) * z * std::sin(x2); };
  auto conv2 = [](double x1, double x2, double z) { return z * std::cos(x2) * std::cos(x1); };
  const Vol e1 = scale_layers(oracle::sample(*g, conv1, conv1), -prm.rho_plus, -prm.rho_minus);
  const Vol e2 = scale_layers(oracle::sample(*g, conv2, conv2), -prm.rho_plus, -prm.rho_minus);
  CHECK((f[0].physical() - e1).max_abs() < 1e-12);
  CHECK((f[1].physical() - e2).max_abs() < 1e-12);
  CHECK(f[2].max_abs() < 1e-12);

  const BoundaryForcing gf = forcing_g(u, c, prm);
  CHECK(max_abs(gf.plus) < 1e-13);
  CHECK(max_abs(gf.minus) < 1e-13);

  // without surface tension the convection sits in G1
  const ForcingSet G = perturbations_no_st(u, p, c, prm);
  for (int i = 0; i < 3; ++i) CHECK((G.G1[i] - f[i]).max_abs() < 1e-14);
  CHECK(G.G2.max_abs() == 0.0);
  CHECK(max_abs(G.G3plus) == 0.0);
  CHECK(max_abs(G.G3minus) == 0.0);
  CHECK(G.G4plus.coeffs().abs().maxCoeff() == 0.0);
  CHECK(G.G4minus.coeffs().abs().maxCoeff() == 0.0);

  const StokesPerturbation S = a_stokes_perturbation(u, p, c, prm);
  CHECK(siw::max_abs(S.G1) == 0.0);
  CHECK(S.G2.max_abs() == 0.0);
}

TEST_CASE("f requires the time derivative of the surfaces") {
  const GridPtr g = grid();
  const FluidParams prm = oracle::uneven();
  const GeometryCache c = build_geometry(SurfaceField(g), SurfaceField(g), std::nullopt, std::nullopt, prm,
                                         default_extension());
  CHECK_THROWS_AS(forcing_f(shear_flow(g), LayeredField(g), c, prm), InvalidArgument);
}

TEST_CASE("G3+ for a fluid at rest under a cosine surface") {
  // u = 0, p = P: G3+ = (P - rho+ g eta)(d1 eta, d2 eta, 0)
  const GridPtr g = grid(16, 8);
  const FluidParams prm = oracle::uneven();
  const double eps = 0.02, P = 0.7;
  const SurfaceField eta = SurfaceField::cosine(g, 1, 0, eps);
  const GeometryCache c = build_geometry(eta, SurfaceField(g), std::nullopt, std::nullopt, prm, default_extension());
  LayeredField p = LayeredField::from_physical(g, vol_constant(*g, P), Jump::Discontinuous);
  const ForcingSet G = perturbations_no_st(make_vector(g), p, c, prm);
  const Eigen::ArrayXd expect = oracle::sample_surface(*g, [&](double x1, double) {
    return (P - prm.rho_plus * prm.g * eps * std::cos(x1)) * (-eps * std::sin(x1));
  });
  CHECK((G.G3plus[0].physical() - expect).abs().maxCoeff() < 1e-14);
  CHECK(G.G3plus[1].physical().abs().maxCoeff() < 1e-14);
  CHECK(G.G3plus[2].physical().abs().maxCoeff() < 1e-14);
  // a constant pressure has no jump and the interface is flat
  CHECK(max_abs(G.G3minus) < 1e-14);
}

TEST_CASE("g+ for a fluid at rest is the curvature remainder") {
  // eta = eps cos x1: H - Lap eta = eta'' ((1 + eta'^2)^{-3/2} - 1)
  const GridPtr g = grid(32, 6);
  const FluidParams prm = oracle::uneven();
  const double eps = 0.05;
  const GeometryCache c = build_geometry(SurfaceField::cosine(g, 1, 0, eps), SurfaceField::cosine(g, 0, 1, eps),
                                         std::nullopt, std::nullopt, prm, default_extension());
  const BoundaryForcing gf = forcing_g(make_vector(g), c, prm);
  auto remainder = [&](double s) {
    const double d1 = -eps * std::sin(s), d11 = -eps * std::cos(s);
    return d11 * (std::pow(1 + d1 * d1, -1.5) - 1.0);
  };
  const Eigen::ArrayXd top = oracle::sample_surface(*g, [&](double x1, double) { return -prm.sigma_plus * remainder(x1); });
  CHECK(gf.plus[0].physical().abs().maxCoeff() < 1e-14);
  CHECK(gf.plus[1].physical().abs().maxCoeff() < 1e-14);
  CHECK((gf.plus[2].physical() - top).abs().maxCoeff() < 1e-12 * top.abs().maxCoeff());
  // the interface jump carries the same remainder (in x2) with sigma-
  const Eigen::ArrayXd mid =
      oracle::sample_surface(*g, [&](double, double x2) { return -prm.sigma_minus * remainder(x2); });
  CHECK((gf.minus[2].physical() - mid).abs().maxCoeff() < 1e-12 * mid.abs().maxCoeff());
}

TEST_CASE("curvature remainder of a radially symmetric cap") {
  // eta = a (x1^2 + x2^2) / 2 near the origin: H = 2a / (1 + a^2 r^2)^{3/2} + a^3 r^2 / (...)
  // checked at single points against the divergence form evaluated by hand
  const double a = 0.4;
  for (double r : {0.0, 0.3, 1.1}) {
    const double th = 0.7;
    const double x1 = r * std::cos(th), x2 = r * std::sin(th);
    Eigen::ArrayXd d1(1), d2(1), d11(1), d12(1), d22(1);
    d1 << a * x1;
    d2 << a * x2;
    d11 << a;
    d12 << 0.0;
    d22 << a;
    // div(grad eta / sqrt(1 + |grad eta|^2)) for a paraboloid
    const double s = 1 + a * a * r * r;
    const double H = 2 * a / std::sqrt(s) - a * a * a * r * r / std::pow(s, 1.5);
    CHECK(curvature_remainder(d1, d2, d11, d12, d22)[0] == doctest::Approx(H - 2 * a).epsilon(1e-13));
  }
}

TEST_CASE("kinematic rate: u3 minus horizontal advection of eta") {
  const GridPtr g = grid();
  VectorField u = make_vector(g);
  u[0] = LayeredField::from_physical(g, vol_constant(*g, 0.5));
  u[2] = LayeredField::from_physical(
      g, oracle::sample(*g, [](double, double x2, double) { return std::cos(x2); },
                        [](double, double x2, double) { return std::cos(x2); }));
  const double eps = 0.1;
  const SurfaceField eta = SurfaceField::cosine(g, 1, 0, eps);
  const Eigen::ArrayXd expect =
      oracle::sample_surface(*g, [&](double x1, double x2) { return std::cos(x2) + 0.5 * eps * std::sin(x1); });
  CHECK((kinematic_rate(u, eta, 0).physical() - expect).abs().maxCoeff() < 1e-14);
  CHECK((kinematic_rate(u, eta, 1).physical() - expect).abs().maxCoeff() < 1e-14);
}

TEST_CASE("every forcing term is quadratic in the amplitude") {
  const GridPtr g = grid(8, 10);
  const FluidParams prm = oracle::uneven();
  const oracle::Manufactured m{1.0, prm};
  auto uh = [&](double a, double b, double z) { return m.u_h(a, b, z); };
  auto u3 = [&](double a, double b, double z) { return m.u_3(a, b, z); };
  auto pu = [&](double a, double b, double z) { return m.p(Layer::Upper, a, b, z); };
  auto pl = [&](double a, double b, double z) { return m.p(Layer::Lower, a, b, z); };
  const LayeredField U1 = LayeredField::from_physical(g, oracle::sample(*g, uh, uh));
  const LayeredField U3 = LayeredField::from_physical(g, oracle::sample(*g, u3, u3));
  const LayeredField P = LayeredField::from_physical(g, oracle::sample(*g, pu, pl), Jump::Discontinuous);
  std::mt19937_64 rng(17);
  const SurfaceField ep = oracle::random_surface(g, 2, 1.0, rng), em = oracle::random_surface(g, 2, 1.0, rng);
  const SurfaceField dp = oracle::random_surface(g, 2, 1.0, rng), dm = oracle::random_surface(g, 2, 1.0, rng);

  auto sizes = [&](double e) {
    const VectorField u{e * U1, e * U1, e * U3};
    const LayeredField p = e * P;
    const GeometryCache c = build_geometry(e * ep, e * em, e * dp, e * dm, prm, default_extension());
    const VectorField f = forcing_f(u, p, c, prm);
    const BoundaryForcing gf = forcing_g(u, c, prm);
    const ForcingSet G = perturbations_no_st(u, p, c, prm);
    return std::vector<double>{siw::max_abs(f), max_abs(gf.plus),      max_abs(gf.minus),
                               siw::max_abs(G.G1), G.G2.max_abs(),     max_abs(G.G3plus),
                               max_abs(G.G3minus), G.G4plus.coeffs().abs().maxCoeff(),
                               G.G4minus.coeffs().abs().maxCoeff()};
  };
  const std::vector<double> a = sizes(1e-3), b = sizes(5e-4);
  const char* names[] = {"f", "g+", "g-", "G1", "G2", "G3+", "G3-", "G4+", "G4-"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CAPTURE(names[i]);
    REQUIRE(b[i] > 0.0);
    CHECK(std::log2(a[i] / b[i]) == doctest::Approx(2.0).epsilon(0.02));
  }
}
