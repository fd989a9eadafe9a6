#include <doctest.h>

#include "oracles.hpp"
#include "siw/norms.hpp"

using namespace siw;

namespace {
const double pi = M_PI;
GridPtr unit_grid(int N = 8, int nz = 10) { return Grid::make(1.0, 1.0, N, N, nz, nz, 1.0); }
}  // namespace

TEST_CASE("surface transform round trip on band-limited data") {
  const GridPtr g = unit_grid();
  auto f = [](double x1, double x2) { return 0.3 + std::cos(x1) - 0.5 * std::sin(2 * x2) + 0.25 * std::cos(x1 - x2); };
  const Eigen::ArrayXd v = oracle::sample_surface(*g, f);
  const SurfaceField s = SurfaceField::from_physical(g, v);
  CHECK((s.physical() - v).abs().maxCoeff() < 1e-13);
  CHECK(std::abs(s[g->mode_index(0, 0)] - 0.3) < 1e-14);
  CHECK(std::abs(s[g->mode_index(1, 0)] - 0.5) < 1e-14);
}

TEST_CASE("real data have conjugate-symmetric coefficients") {
  const GridPtr g = unit_grid();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::ArrayXd v(g->nmodes());
  for (auto& x : v) x = u(rng);
  const SurfaceField s = SurfaceField::from_physical(g, v, false);
  for (int m = 0; m < g->nmodes(); ++m) CHECK(std::abs(s[g->conj_index(m)] - std::conj(s[m])) < 1e-14);
}

TEST_CASE("horizontal derivative matches the closed form") {
  const GridPtr g = Grid::make(0.5, 2.0, 8, 8, 6, 6, 1.0);
  // period 2 pi L: cos(x1 / L1) has derivative -sin(x1 / L1) / L1
  const SurfaceField s = SurfaceField::from_physical(
      g, oracle::sample_surface(*g, [](double x1, double x2) { return std::cos(x1 / 0.5) * std::sin(x2 / 2.0); }));
  const Eigen::ArrayXd expect = oracle::sample_surface(
      *g, [](double x1, double x2) { return -std::sin(x1 / 0.5) / 0.5 * std::sin(x2 / 2.0); });
  CHECK((s.d(0).physical() - expect).abs().maxCoeff() < 1e-13);
}

TEST_CASE("dealiasing removes modes beyond N/3") {
  const GridPtr g = unit_grid(12);
  const Eigen::ArrayXd v = oracle::sample_surface(*g, [](double x1, double) { return std::cos(x1) + std::cos(5 * x1); });
  const SurfaceField s = SurfaceField::from_physical(g, v, true);
  CHECK(std::abs(s[g->mode_index(5, 0)]) == 0.0);
  CHECK(std::abs(s[g->mode_index(1, 0)] - 0.5) < 1e-14);
}

TEST_CASE("Chebyshev differentiation is exact on polynomials") {
  const ChebLayer l(9, 1.0, 0.0);
  Eigen::VectorXd p(9), dp(9), d2p(9);
  for (int j = 0; j < 9; ++j) {
    const double z = l.z()[j];
    p[j] = std::pow(z, 5) - 2 * z * z;
    dp[j] = 5 * std::pow(z, 4) - 4 * z;
    d2p[j] = 20 * std::pow(z, 3) - 4;
  }
  CHECK((l.D(1) * p - dp).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((l.D(2) * p - d2p).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(l.z()[0] == 1.0);
  CHECK(l.z()[8] == 0.0);
}

TEST_CASE("vertical derivative of a layered field") {
  const GridPtr g = unit_grid(6, 12);
  auto up = [](double x1, double, double z) { return std::cos(x1) * std::exp(z); };
  auto lo = [](double x1, double, double z) { return std::cos(x1) * z * z; };
  const LayeredField f = LayeredField::from_physical(g, oracle::sample(*g, up, lo), Jump::Discontinuous);
  const Vol expect = oracle::sample(*g, up, [](double x1, double, double z) { return 2 * z * std::cos(x1); });
  CHECK((f.d3(1).physical() - expect).max_abs() < 1e-9);
}

TEST_CASE("surface Sobolev norms of cos x1") {
  const GridPtr g = unit_grid();
  const SurfaceField f = SurfaceField::cosine(g, 1, 0, 1.0);
  CHECK(sobolev_norm_sq_surface(f, 0.0) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
  CHECK(sobolev_norm_sq_surface(f, 1.0) == doctest::Approx(4 * pi * pi).epsilon(1e-13));
  CHECK(sobolev_norm_sq_surface(f, -0.5) == doctest::Approx(std::pow(2.0, -0.5) * 2 * pi * pi).epsilon(1e-13));
  CHECK(sobolev_norm_sq_surface(SurfaceField(g), 2.0) == 0.0);
}

TEST_CASE("volume norms against closed-form integrals") {
  const GridPtr g = unit_grid(6, 12);
  const LayeredField one = LayeredField::from_physical(g, vol_constant(*g, 1.0), Jump::Discontinuous);
  CHECK(volume_norm_sq(one, 0) == doctest::Approx(8 * pi * pi).epsilon(1e-12));
  // x3 above, 0 below
  Vol v = vol_x3(*g);
  v.lo.setZero();
  const LayeredField f = LayeredField::from_physical(g, v, Jump::Discontinuous);
  CHECK(volume_norm_sq(f, 1) == doctest::Approx(4 * pi * pi * (1.0 / 3.0 + 1.0)).epsilon(1e-12));
  CHECK(volume_norm_sq(LayeredField(g), 3) == 0.0);
}

TEST_CASE("project_zero_mean") {
  const GridPtr g = unit_grid();
  SurfaceField f = SurfaceField::cosine(g, 1, 0, 1.0);
  f[g->mode_index(0, 0)] = 2.5;
  const SurfaceField p = project_zero_mean(f);
  CHECK(p[g->mode_index(0, 0)] == 0.0);
  CHECK((p - SurfaceField::cosine(g, 1, 0, 1.0)).coeffs().abs().maxCoeff() == 0.0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    SurfaceField r = oracle::random_surface(g, 2, 1.0, rng);
    r[g->mode_index(0, 0)] = double(trial);
    const SurfaceField once = project_zero_mean(r);
    CHECK(once[g->mode_index(0, 0)] == 0.0);
    CHECK((project_zero_mean(once) - once).coeffs().abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("grid rejects odd or tiny sizes") {
  CHECK_THROWS_AS(Grid::make(1, 1, 3, 8, 8, 8, 1), InvalidArgument);
  CHECK_THROWS_AS(Grid::make(1, 1, 8, 2, 8, 8, 1), InvalidArgument);
  CHECK_THROWS_AS(Grid::make(1, 1, 8, 8, 8, 8, -1), InvalidArgument);
}
