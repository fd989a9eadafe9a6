#pragma once

#include "siw/common.hpp"
#include "siw/grid.hpp"

#include <Eigen/Dense>

#include <array>

namespace siw {

// Physical values of a two-layer field, node-major per layer:
// index = node * nmodes + (i1 * N2 + i2).
struct Vol {
  Eigen::ArrayXd up;
  Eigen::ArrayXd lo;

  Eigen::ArrayXd& layer(Layer l) { return l == Layer::Upper ? up : lo; }
  const Eigen::ArrayXd& layer(Layer l) const { return l == Layer::Upper ? up : lo; }
  bool empty() const { return up.size() == 0 && lo.size() == 0; }
  double max_abs() const;
};

Vol vol_constant(const Grid& g, double c);
Vol vol_x3(const Grid& g);
// one horizontal slice of a layer (N1*N2 values)
Eigen::ArrayXd vol_slice(const Grid& g, const Vol& v, Layer l, int node);

inline Vol operator+(const Vol& a, const Vol& b) { return {a.up + b.up, a.lo + b.lo}; }
inline Vol operator-(const Vol& a, const Vol& b) { return {a.up - b.up, a.lo - b.lo}; }
inline Vol operator*(const Vol& a, const Vol& b) { return {a.up * b.up, a.lo * b.lo}; }
inline Vol operator/(const Vol& a, const Vol& b) { return {a.up / b.up, a.lo / b.lo}; }
inline Vol operator-(const Vol& a) { return {-a.up, -a.lo}; }
inline Vol operator*(double s, const Vol& a) { return {s * a.up, s * a.lo}; }
inline Vol operator*(const Vol& a, double s) { return {s * a.up, s * a.lo}; }
inline Vol operator+(const Vol& a, double s) { return {a.up + s, a.lo + s}; }
inline Vol& operator+=(Vol& a, const Vol& b) {
  a.up += b.up;
  a.lo += b.lo;
  return a;
}
inline Vol& operator-=(Vol& a, const Vol& b) {
  a.up -= b.up;
  a.lo -= b.lo;
  return a;
}
// per-layer constant factor, e.g. rho or mu
inline Vol scale_layers(const Vol& a, double s_up, double s_lo) { return {s_up * a.up, s_lo * a.lo}; }

class SurfaceField {
 public:
  SurfaceField() = default;
  explicit SurfaceField(GridPtr grid);

  static SurfaceField from_physical(GridPtr grid, const Eigen::ArrayXd& values, bool dealias = true);
  static SurfaceField single_mode(GridPtr grid, int k1, int k2, cplx amplitude);
  // amplitude * cos(k1 x1/L1 + k2 x2/L2)
  static SurfaceField cosine(GridPtr grid, int k1, int k2, double amplitude);

  Eigen::ArrayXd physical() const;
  const GridPtr& grid() const { return grid_; }
  const Eigen::ArrayXcd& coeffs() const { return c_; }
  Eigen::ArrayXcd& coeffs() { return c_; }
  cplx operator[](int m) const { return c_[m]; }
  cplx& operator[](int m) { return c_[m]; }
  bool is_real() const { return real_; }
  void set_real(bool r) { real_ = r; }
  bool valid() const { return grid_ != nullptr; }

  // dir = 0, 1
  SurfaceField d(int dir) const;
  SurfaceField laplacian() const;
  SurfaceField& operator+=(const SurfaceField& o);
  SurfaceField& operator-=(const SurfaceField& o);
  SurfaceField& operator*=(double s);

 private:
  GridPtr grid_;
  Eigen::ArrayXcd c_;
  bool real_ = true;
};

SurfaceField operator+(SurfaceField a, const SurfaceField& b);
SurfaceField operator-(SurfaceField a, const SurfaceField& b);
SurfaceField operator*(double s, SurfaceField a);

SurfaceField project_zero_mean(SurfaceField f);
void dealias(SurfaceField& f);

enum class Jump { Continuous, Discontinuous };

// Fourier in x', nodal in x3 per layer. Layout per layer: node * nmodes + mode.
class LayeredField {
 public:
  LayeredField() = default;
  explicit LayeredField(GridPtr grid, Jump jump = Jump::Continuous);

  static LayeredField from_physical(GridPtr grid, const Vol& values, Jump jump = Jump::Continuous,
                                    bool dealias = true, Exec exec = Exec::Parallel);

  Vol physical(Exec exec = Exec::Parallel) const;

  const GridPtr& grid() const { return grid_; }
  Jump jump() const { return jump_; }
  void set_jump(Jump j) { jump_ = j; }
  bool valid() const { return grid_ != nullptr; }
  Eigen::ArrayXcd& layer(Layer l) { return l == Layer::Upper ? up_ : lo_; }
  const Eigen::ArrayXcd& layer(Layer l) const { return l == Layer::Upper ? up_ : lo_; }
  cplx& at(Layer l, int node, int mode) { return layer(l)[node * grid_->nmodes() + mode]; }
  cplx at(Layer l, int node, int mode) const { return layer(l)[node * grid_->nmodes() + mode]; }

  // dir = 0, 1 horizontal (Fourier multiplier), 2 vertical (collocation)
  LayeredField d(int dir) const;
  LayeredField d3(int order) const;

  // Row of nodal values at a layer node as a surface field.
  SurfaceField slice(Layer l, int node) const;
  SurfaceField trace_top() const { return slice(Layer::Upper, 0); }
  SurfaceField trace_interface(Layer l) const {
    return l == Layer::Upper ? slice(Layer::Upper, grid_->nz(Layer::Upper) - 1) : slice(Layer::Lower, 0);
  }
  SurfaceField trace_bottom() const { return slice(Layer::Lower, grid_->nz(Layer::Lower) - 1); }

  LayeredField& operator+=(const LayeredField& o);
  LayeredField& operator-=(const LayeredField& o);
  LayeredField& operator*=(double s);
  double max_abs() const;

 private:
  GridPtr grid_;
  Eigen::ArrayXcd up_, lo_;
  Jump jump_ = Jump::Continuous;
};

LayeredField operator+(LayeredField a, const LayeredField& b);
LayeredField operator-(LayeredField a, const LayeredField& b);
LayeredField operator*(double s, LayeredField a);
void dealias(LayeredField& f);

using VectorField = std::array<LayeredField, 3>;
using SurfaceVector = std::array<SurfaceField, 3>;

VectorField make_vector(const GridPtr& g, Jump jump = Jump::Continuous);
SurfaceVector make_surface_vector(const GridPtr& g);
double max_abs(const VectorField& v);

// Physical -> dealiased spectrum -> derivatives, keeping the spectrum around.
class SpectralView {
 public:
  SpectralView(const GridPtr& g, const Vol& v, Exec exec = Exec::Parallel);
  explicit SpectralView(LayeredField f, Exec exec = Exec::Parallel) : f_(std::move(f)), exec_(exec) {}
  // first derivative along dir (0,1,2)
  Vol d(int dir) const;
  // second derivative d_a d_b
  Vol dd(int a, int b) const;
  const LayeredField& field() const { return f_; }

 private:
  LayeredField f_;
  Exec exec_;
};

}  // namespace siw
