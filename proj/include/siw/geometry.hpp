#pragma once

#include "siw/fields.hpp"
#include "siw/params.hpp"

#include <array>
#include <optional>
#include <vector>

namespace siw {

struct ExtensionSpec {
  int m = 0;
  std::vector<double> lambdas;
  std::vector<double> alphas;
  double residual = 0.0;
};

// alphas with sum_j alpha_j (-lambda_j)^i = 1 for i = 0..m
ExtensionSpec vandermonde_coeffs(const std::vector<double>& lambdas);
ExtensionSpec default_extension();

// Extension of the top surface: eta^(n) exp(|n|(x3-1)) on every node of both
// layers. dz_order > 0 returns the analytic x3-derivative of that order.
LayeredField poisson_extend_upper(const SurfaceField& eta, int dz_order = 0);
// Extension of the interface: eta^(n) exp(|n| x3) below, eta^(n) sum_j alpha_j
// exp(-|n| lambda_j x3) above.
LayeredField poisson_extend_lower(const SurfaceField& eta, const ExtensionSpec& spec, int dz_order = 0);

// Direct evaluation of an extension (or its derivatives) at an arbitrary
// point, summing over modes. Used as an independent oracle.
enum class ExtensionKind { Upper, Lower };
double evaluate_extension(const SurfaceField& eta, ExtensionKind kind, const ExtensionSpec& spec, double x1,
                          double x2, double x3, int d1 = 0, int d2 = 0, int d3 = 0);

// Pointwise transform components for a general bottom b(x'), including the
// terms carrying d_i b. The runtime solver only calls it with db = 0.
struct ExtensionValues {
  double ep = 0, ep1 = 0, ep2 = 0, ep3 = 0;  // eta_bar_+ and its derivatives
  double em = 0, em1 = 0, em2 = 0, em3 = 0;  // eta_bar_-
};
struct TransformComponents {
  double A, B, J;
};
TransformComponents transform_components(Layer layer, double x3, const ExtensionValues& e, double b, double db1,
                                         double db2);
double theta3(Layer layer, double x3, double ep, double em, double b);

// 3x3 matrix field with an explicit sparsity pattern; absent entries are zero.
struct Mat3Field {
  std::array<Vol, 9> e;
  std::array<bool, 9> nz{};

  bool has(int i, int j) const { return nz[3 * i + j]; }
  const Vol& operator()(int i, int j) const { return e[3 * i + j]; }
  void set(int i, int j, Vol v) {
    e[3 * i + j] = std::move(v);
    nz[3 * i + j] = true;
  }
};

struct DiffeoReport {
  double min_j = 1.0;
  double max_j = 1.0;
  bool ok = true;
  Layer min_layer = Layer::Upper;
  int min_node = 0;
  int min_point = 0;
};

struct GeometryCache {
  GridPtr grid;
  FluidParams params;
  ExtensionSpec spec;
  SurfaceField eta_plus, eta_minus, dt_eta_plus, dt_eta_minus;
  bool has_time_derivative = false;

  LayeredField eta_bar_plus, eta_bar_minus;

  Vol x3, btilde;
  Vol A, B, J, K;
  // J-1, K-1, A*K, B*K: zero at the flat state, so their derivatives are
  // exactly zero there.
  Vol Jm1, Km1, AK, BK;
  Vol W;
  Vol At, Bt, Jt, Kt;

  Mat3Field Amat;   // (grad Theta)^{-T}
  Mat3Field Adev;   // Amat - I
  Mat3Field theta;  // grad Theta
  Mat3Field M;      // K grad Theta
  Mat3Field dtM;
  Mat3Field R;      // dtM M^{-1}
  std::array<Mat3Field, 3> dA;  // d_k Amat
  std::array<Mat3Field, 3> dM;  // d_k M
  std::array<Mat3Field, 6> ddM;  // d_k d_l M, symmetric pair index

  // surfaces: 0 = top (Sigma_+), 1 = interface (Sigma_-)
  std::array<Eigen::ArrayXd, 2> eta;
  std::array<std::array<Eigen::ArrayXd, 2>, 2> deta;       // d_1, d_2
  std::array<std::array<Eigen::ArrayXd, 3>, 2> ddeta;      // d11, d12, d22
  std::array<std::array<Eigen::ArrayXd, 3>, 2> N;          // (-d1 eta, -d2 eta, 1)
  std::array<std::array<std::array<Eigen::ArrayXd, 3>, 2>, 2> T;  // T[s][i] = e_i + d_i eta e_3

  DiffeoReport diffeo;
};

inline int pair_index(int k, int l) {
  if (k > l) std::swap(k, l);
  static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return idx[k][l];
}

// Throws DiffeoError when min J <= 0.
GeometryCache build_geometry(const SurfaceField& eta_plus, const SurfaceField& eta_minus,
                             const std::optional<SurfaceField>& dt_eta_plus,
                             const std::optional<SurfaceField>& dt_eta_minus, const FluidParams& params,
                             const ExtensionSpec& spec, Exec exec = Exec::Parallel);

DiffeoReport check_diffeo(const GeometryCache& cache, double j_floor = 0.1);

}  // namespace siw
