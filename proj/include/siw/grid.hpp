#pragma once

#include "siw/common.hpp"

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace siw {

// Chebyshev-Lobatto collocation on [bottom, top]. Node 0 is the top of the
// interval, node n-1 the bottom.
class ChebLayer {
 public:
  ChebLayer(int n, double top, double bottom);

  int size() const { return n_; }
  double top() const { return top_; }
  double bottom() const { return bottom_; }
  const Eigen::VectorXd& z() const { return z_; }
  // d^k/dz^k for k = 1..4
  const Eigen::MatrixXd& D(int k = 1) const;
  const Eigen::MatrixXcd& Dc(int k = 1) const;
  // Clenshaw-Curtis weights on the physical interval
  const Eigen::VectorXd& weights() const { return w_; }
  // Barycentric interpolation of nodal values to an arbitrary point.
  double interpolate(const Eigen::VectorXd& values, double z) const;

 private:
  int n_;
  double top_, bottom_;
  Eigen::VectorXd z_, xi_, w_;
  std::array<Eigen::MatrixXd, 4> D_;
  std::array<Eigen::MatrixXcd, 4> Dc_;
};

struct VerticalGrid {
  VerticalGrid(int nz_plus, int nz_minus, double b0)
      : upper(nz_plus, 1.0, 0.0), lower(nz_minus, 0.0, -b0), b0(b0) {}
  const ChebLayer& layer(Layer l) const { return l == Layer::Upper ? upper : lower; }
  ChebLayer upper;
  ChebLayer lower;
  double b0;
};

// 2-D complex FFT on the horizontal grid. Spectral coefficients follow
// f(x) = sum_k c_k exp(i n.x), i.e. forward() divides by N1*N2.
class HorizontalFFT {
 public:
  HorizontalFFT(int N1, int N2);
  ~HorizontalFFT();
  HorizontalFFT(const HorizontalFFT&) = delete;
  HorizontalFFT& operator=(const HorizontalFFT&) = delete;

  void forward(const double* phys, cplx* spec) const;
  void backward(const cplx* spec, double* phys) const;

 private:
  int n_;
  void* plan_fwd_;
  void* plan_bwd_;
};

class Grid {
 public:
  Grid(double L1, double L2, int N1, int N2, int nz_plus, int nz_minus, double b0);

  static std::shared_ptr<const Grid> make(double L1, double L2, int N1, int N2, int nz_plus,
                                          int nz_minus, double b0) {
    return std::make_shared<const Grid>(L1, L2, N1, N2, nz_plus, nz_minus, b0);
  }

  double L1() const { return L1_; }
  double L2() const { return L2_; }
  int N1() const { return N1_; }
  int N2() const { return N2_; }
  int nmodes() const { return N1_ * N2_; }
  int nz(Layer l) const { return vertical_.layer(l).size(); }
  double b0() const { return vertical_.b0; }
  const VerticalGrid& vertical() const { return vertical_; }
  const ChebLayer& layer(Layer l) const { return vertical_.layer(l); }
  const HorizontalFFT& fft() const { return *fft_; }

  // mode index m = i1*N2 + i2 in FFT order
  int mode_index(int k1, int k2) const;
  int k1(int m) const { return k1_[m]; }
  int k2(int m) const { return k2_[m]; }
  double n1(int m) const { return k1_[m] / L1_; }
  double n2(int m) const { return k2_[m] / L2_; }
  double nabs(int m) const { return nabs_[m]; }
  double nabs2(int m) const { return nabs_[m] * nabs_[m]; }
  int conj_index(int m) const { return conj_[m]; }
  bool in_band(int m) const { return in_band_[m]; }
  int cutoff1() const { return N1_ / 3; }
  int cutoff2() const { return N2_ / 3; }
  // In-band modes with k2 > 0, or k2 == 0 and k1 >= 0. Includes the zero mode.
  const std::vector<int>& canonical_modes() const { return canonical_; }

  double x1(int i1) const { return 2.0 * M_PI * L1_ * i1 / N1_; }
  double x2(int i2) const { return 2.0 * M_PI * L2_ * i2 / N2_; }
  // |T^2| and the Parseval factor between c_k and the normalized coefficients
  double area() const { return 4.0 * M_PI * M_PI * L1_ * L2_; }

 private:
  double L1_, L2_;
  int N1_, N2_;
  VerticalGrid vertical_;
  std::unique_ptr<HorizontalFFT> fft_;
  std::vector<int> k1_, k2_, conj_;
  std::vector<double> nabs_;
  std::vector<bool> in_band_;
  std::vector<int> canonical_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace siw
