#include "siw/grid.hpp"
#include "siw/params.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <sstream>

namespace siw {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::string> violations(const FluidParams& p) {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be positive and finite");
  };
  positive(p.rho_plus, "rho_plus");
  positive(p.rho_minus, "rho_minus");
  positive(p.mu_plus, "mu_plus");
  positive(p.mu_minus, "mu_minus");
  positive(p.g, "g");
  positive(p.L1, "L1");
  positive(p.L2, "L2");
  positive(p.b0, "b0");
  if (!(p.sigma_plus >= 0.0)) out.push_back("sigma_plus must be >= 0");
  if (!(p.sigma_minus >= 0.0)) out.push_back("sigma_minus must be >= 0");
  return out;
}

void validate(const FluidParams& p) {
  auto v = violations(p);
  if (v.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "; " : "") << v[i];
  throw InvalidArgument(os.str());
}

ChebLayer::ChebLayer(int n, double top, double bottom) : n_(n), top_(top), bottom_(bottom) {
  if (n < 3) throw InvalidArgument("Chebyshev layer needs at least 3 nodes");
  if (!(top > bottom)) throw InvalidArgument("Chebyshev layer needs top > bottom");
  const int N = n - 1;
  xi_.resize(n);
  for (int j = 0; j < n; ++j) xi_[j] = std::sin(M_PI * (N - 2.0 * j) / (2.0 * N));
  const double half = 0.5 * (top - bottom);
  z_ = bottom + half * (1.0 + xi_.array());
  z_[0] = top;
  z_[N] = bottom;

  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = ((i == 0 || i == N) ? 2.0 : 1.0) * ((i % 2) ? -1.0 : 1.0);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      D(i, j) = (c[i] / c[j]) / (xi_[i] - xi_[j]);
      s += D(i, j);
    }
    D(i, i) = -s;
  }
  D /= half;
  D_[0] = D;
  for (int k = 1; k < 4; ++k) D_[k] = D_[k - 1] * D;
  for (int k = 0; k < 4; ++k) Dc_[k] = D_[k].cast<cplx>();

  // Clenshaw-Curtis
  w_ = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(N - 1);
  auto theta = [&](int j) { return M_PI * j / N; };
  if (N % 2 == 0) {
    w_[0] = w_[N] = 1.0 / (N * N - 1.0);
    for (int k = 1; k < N / 2; ++k)
      for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
    for (int j = 1; j < N; ++j) v[j - 1] -= std::cos(N * theta(j)) / (N * N - 1.0);
  } else {
    w_[0] = w_[N] = 1.0 / (double(N) * N);
    for (int k = 1; k <= (N - 1) / 2; ++k)
      for (int j = 1; j < N; ++j) v[j - 1] -= 2.0 * std::cos(2.0 * k * theta(j)) / (4.0 * k * k - 1.0);
  }
  for (int j = 1; j < N; ++j) w_[j] = 2.0 * v[j - 1] / N;
  w_ *= half;
}

const Eigen::MatrixXd& ChebLayer::D(int k) const {
  if (k < 1 || k > 4) throw InvalidArgument("derivative order must be 1..4");
  return D_[k - 1];
}

const Eigen::MatrixXcd& ChebLayer::Dc(int k) const {
  if (k < 1 || k > 4) throw InvalidArgument("derivative order must be 1..4");
  return Dc_[k - 1];
}

double ChebLayer::interpolate(const Eigen::VectorXd& values, double z) const {
  const double xi = 2.0 * (z - bottom_) / (top_ - bottom_) - 1.0;
  const int N = n_ - 1;
  double num = 0.0, den = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double d = xi - xi_[j];
    if (d == 0.0) return values[j];
    double w = (j % 2) ? -1.0 : 1.0;
    if (j == 0 || j == N) w *= 0.5;
    num += w * values[j] / d;
    den += w / d;
  }
  return num / den;
}

HorizontalFFT::HorizontalFFT(int N1, int N2) : n_(N1 * N2) {
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* a = fftw_alloc_complex(n_);
  auto* b = fftw_alloc_complex(n_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plan_fwd_ = fftw_plan_dft_2d(N1, N2, a, b, FFTW_FORWARD, flags);
  plan_bwd_ = fftw_plan_dft_2d(N1, N2, a, b, FFTW_BACKWARD, flags);
  fftw_free(a);
  fftw_free(b);
}

HorizontalFFT::~HorizontalFFT() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void HorizontalFFT::forward(const double* phys, cplx* spec) const {
  std::vector<cplx> in(phys, phys + n_);
  fftw_execute_dft(static_cast<fftw_plan>(plan_fwd_), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(spec));
  const double s = 1.0 / n_;
  for (int i = 0; i < n_; ++i) spec[i] *= s;
}

void HorizontalFFT::backward(const cplx* spec, double* phys) const {
  std::vector<cplx> in(spec, spec + n_), out(n_);
  fftw_execute_dft(static_cast<fftw_plan>(plan_bwd_), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  for (int i = 0; i < n_; ++i) phys[i] = out[i].real();
}

Grid::Grid(double L1, double L2, int N1, int N2, int nz_plus, int nz_minus, double b0)
    : L1_(L1), L2_(L2), N1_(N1), N2_(N2), vertical_(nz_plus, nz_minus, b0) {
  std::ostringstream err;
  if (!(L1 > 0) || !(L2 > 0)) err << "L1, L2 must be positive; ";
  if (N1 < 4 || N1 % 2) err << "N1 must be even and >= 4 (got " << N1 << "); ";
  if (N2 < 4 || N2 % 2) err << "N2 must be even and >= 4 (got " << N2 << "); ";
  if (!(b0 > 0)) err << "b0 must be positive; ";
  if (!err.str().empty()) throw InvalidArgument(err.str());
  fft_ = std::make_unique<HorizontalFFT>(N1, N2);
  const int nm = N1 * N2;
  k1_.resize(nm);
  k2_.resize(nm);
  conj_.resize(nm);
  nabs_.resize(nm);
  in_band_.resize(nm);
  auto wrap = [](int i, int N) { return i < N / 2 ? i : i - N; };
  for (int i1 = 0; i1 < N1; ++i1)
    for (int i2 = 0; i2 < N2; ++i2) {
      const int m = i1 * N2 + i2;
      k1_[m] = wrap(i1, N1);
      k2_[m] = wrap(i2, N2);
      nabs_[m] = std::hypot(k1_[m] / L1, k2_[m] / L2);
      in_band_[m] = std::abs(k1_[m]) <= N1 / 3 && std::abs(k2_[m]) <= N2 / 3;
      conj_[m] = ((N1 - i1) % N1) * N2 + (N2 - i2) % N2;
    }
  for (int m = 0; m < nm; ++m) {
    if (!in_band_[m]) continue;
    if (k2_[m] > 0 || (k2_[m] == 0 && k1_[m] >= 0)) canonical_.push_back(m);
  }
}

int Grid::mode_index(int k1, int k2) const {
  if (std::abs(k1) >= N1_ / 2 + (k1 < 0 ? 1 : 0) || std::abs(k2) >= N2_ / 2 + (k2 < 0 ? 1 : 0))
    throw InvalidArgument("mode outside the grid");
  const int i1 = (k1 + N1_) % N1_;
  const int i2 = (k2 + N2_) % N2_;
  return i1 * N2_ + i2;
}

}  // namespace siw
