#include "siw/fields.hpp"
#include "siw/parallel.hpp"

#include <cmath>

namespace siw {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_same_grid(const GridPtr& a, const GridPtr& b) {
  if (a.get() != b.get()) throw InvalidArgument("fields live on different grids");
}

void mask_band(const Grid& g, cplx* c) {
  for (int m = 0; m < g.nmodes(); ++m)
    if (!g.in_band(m)) c[m] = 0.0;
}

}  // namespace

double Vol::max_abs() const {
  double a = up.size() ? up.abs().maxCoeff() : 0.0;
  double b = lo.size() ? lo.abs().maxCoeff() : 0.0;
  return std::max(a, b);
}

Vol vol_constant(const Grid& g, double c) {
  return {Eigen::ArrayXd::Constant(g.nz(Layer::Upper) * g.nmodes(), c),
          Eigen::ArrayXd::Constant(g.nz(Layer::Lower) * g.nmodes(), c)};
}

Vol vol_x3(const Grid& g) {
  Vol v = vol_constant(g, 0.0);
  const int nm = g.nmodes();
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const auto& z = g.layer(l).z();
    for (int j = 0; j < z.size(); ++j) v.layer(l).segment(j * nm, nm).setConstant(z[j]);
  }
  return v;
}

Eigen::ArrayXd vol_slice(const Grid& g, const Vol& v, Layer l, int node) {
  return v.layer(l).segment(node * g.nmodes(), g.nmodes());
}

SurfaceField::SurfaceField(GridPtr grid) : grid_(std::move(grid)), c_(Eigen::ArrayXcd::Zero(grid_->nmodes())) {}

SurfaceField SurfaceField::from_physical(GridPtr grid, const Eigen::ArrayXd& values, bool dealias_it) {
  SurfaceField f(grid);
  if (values.size() != grid->nmodes()) throw InvalidArgument("surface values have wrong size");
  grid->fft().forward(values.data(), f.c_.data());
  if (dealias_it) mask_band(*grid, f.c_.data());
  return f;
}

SurfaceField SurfaceField::single_mode(GridPtr grid, int k1, int k2, cplx amplitude) {
  SurfaceField f(grid);
  f.c_[grid->mode_index(k1, k2)] = amplitude;
  f.real_ = false;
  return f;
}

SurfaceField SurfaceField::cosine(GridPtr grid, int k1, int k2, double amplitude) {
  SurfaceField f(grid);
  if (k1 == 0 && k2 == 0) {
    f.c_[0] = amplitude;
    return f;
  }
  f.c_[grid->mode_index(k1, k2)] += 0.5 * amplitude;
  f.c_[grid->mode_index(-k1, -k2)] += 0.5 * amplitude;
  return f;
}

Eigen::ArrayXd SurfaceField::physical() const {
  Eigen::ArrayXd out(grid_->nmodes());
  grid_->fft().backward(c_.data(), out.data());
  return out;
}

SurfaceField SurfaceField::d(int dir) const {
  SurfaceField out(*this);
  for (int m = 0; m < grid_->nmodes(); ++m) {
    const double n = dir == 0 ? grid_->n1(m) : grid_->n2(m);
    out.c_[m] *= cplx(0.0, n);
  }
  return out;
}

SurfaceField SurfaceField::laplacian() const {
  SurfaceField out(*this);
  for (int m = 0; m < grid_->nmodes(); ++m) out.c_[m] *= -grid_->nabs2(m);
  return out;
}

SurfaceField& SurfaceField::operator+=(const SurfaceField& o) {
  check_same_grid(grid_, o.grid_);
  c_ += o.c_;
  real_ = real_ && o.real_;
  return *this;
}

SurfaceField& SurfaceField::operator-=(const SurfaceField& o) {
  check_same_grid(grid_, o.grid_);
  c_ -= o.c_;
  real_ = real_ && o.real_;
  return *this;
}

SurfaceField& SurfaceField::operator*=(double s) {
  c_ *= s;
  return *this;
}

SurfaceField operator+(SurfaceField a, const SurfaceField& b) { return a += b; }
SurfaceField operator-(SurfaceField a, const SurfaceField& b) { return a -= b; }
SurfaceField operator*(double s, SurfaceField a) { return a *= s; }

SurfaceField project_zero_mean(SurfaceField f) {
  f[0] = 0.0;
  return f;
}

void dealias(SurfaceField& f) { mask_band(*f.grid(), f.coeffs().data()); }

LayeredField::LayeredField(GridPtr grid, Jump jump)
    : grid_(std::move(grid)),
      up_(Eigen::ArrayXcd::Zero(grid_->nz(Layer::Upper) * grid_->nmodes())),
      lo_(Eigen::ArrayXcd::Zero(grid_->nz(Layer::Lower) * grid_->nmodes())),
      jump_(jump) {}

LayeredField LayeredField::from_physical(GridPtr grid, const Vol& values, Jump jump, bool dealias_it,
                                         Exec exec) {
  LayeredField f(grid, jump);
  const int nm = grid->nmodes();
  const int nu = grid->nz(Layer::Upper);
  const int nl = grid->nz(Layer::Lower);
  if (values.up.size() != nu * nm || values.lo.size() != nl * nm)
    throw InvalidArgument("volume values have wrong size");
  parallel_for(nu + nl, exec, [&](std::ptrdiff_t s) {
    const Layer l = s < nu ? Layer::Upper : Layer::Lower;
    const int node = s < nu ? int(s) : int(s) - nu;
    cplx* dst = f.layer(l).data() + node * nm;
    grid->fft().forward(values.layer(l).data() + node * nm, dst);
    if (dealias_it) mask_band(*grid, dst);
  });
  return f;
}

Vol LayeredField::physical(Exec exec) const {
  const int nm = grid_->nmodes();
  const int nu = grid_->nz(Layer::Upper);
  const int nl = grid_->nz(Layer::Lower);
  Vol v{Eigen::ArrayXd(nu * nm), Eigen::ArrayXd(nl * nm)};
  parallel_for(nu + nl, exec, [&](std::ptrdiff_t s) {
    const Layer l = s < nu ? Layer::Upper : Layer::Lower;
    const int node = s < nu ? int(s) : int(s) - nu;
    grid_->fft().backward(layer(l).data() + node * nm, v.layer(l).data() + node * nm);
  });
  return v;
}

LayeredField LayeredField::d(int dir) const {
  if (dir == 2) return d3(1);
  LayeredField out(*this);
  const int nm = grid_->nmodes();
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    auto& a = out.layer(l);
    const int nz = grid_->nz(l);
    for (int j = 0; j < nz; ++j)
      for (int m = 0; m < nm; ++m) {
        const double n = dir == 0 ? grid_->n1(m) : grid_->n2(m);
        a[j * nm + m] *= cplx(0.0, n);
      }
  }
  return out;
}

LayeredField LayeredField::d3(int order) const {
  LayeredField out(grid_, jump_);
  const int nm = grid_->nmodes();
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const int nz = grid_->nz(l);
    Eigen::Map<const RowMat> F(layer(l).data(), nz, nm);
    Eigen::Map<RowMat> G(out.layer(l).data(), nz, nm);
    G.noalias() = grid_->layer(l).Dc(order) * F;
  }
  return out;
}

SurfaceField LayeredField::slice(Layer l, int node) const {
  SurfaceField s(grid_);
  const int nm = grid_->nmodes();
  s.coeffs() = layer(l).segment(node * nm, nm);
  return s;
}

LayeredField& LayeredField::operator+=(const LayeredField& o) {
  check_same_grid(grid_, o.grid_);
  up_ += o.up_;
  lo_ += o.lo_;
  return *this;
}

LayeredField& LayeredField::operator-=(const LayeredField& o) {
  check_same_grid(grid_, o.grid_);
  up_ -= o.up_;
  lo_ -= o.lo_;
  return *this;
}

LayeredField& LayeredField::operator*=(double s) {
  up_ *= s;
  lo_ *= s;
  return *this;
}

double LayeredField::max_abs() const {
  double a = up_.size() ? up_.abs().maxCoeff() : 0.0;
  double b = lo_.size() ? lo_.abs().maxCoeff() : 0.0;
  return std::max(a, b);
}

LayeredField operator+(LayeredField a, const LayeredField& b) { return a += b; }
LayeredField operator-(LayeredField a, const LayeredField& b) { return a -= b; }
LayeredField operator*(double s, LayeredField a) { return a *= s; }

void dealias(LayeredField& f) {
  const Grid& g = *f.grid();
  for (Layer l : {Layer::Upper, Layer::Lower})
    for (int j = 0; j < g.nz(l); ++j) mask_band(g, f.layer(l).data() + j * g.nmodes());
}

VectorField make_vector(const GridPtr& g, Jump jump) {
  return {LayeredField(g, jump), LayeredField(g, jump), LayeredField(g, jump)};
}

SurfaceVector make_surface_vector(const GridPtr& g) {
  return {SurfaceField(g), SurfaceField(g), SurfaceField(g)};
}

double max_abs(const VectorField& v) {
  return std::max({v[0].max_abs(), v[1].max_abs(), v[2].max_abs()});
}

SpectralView::SpectralView(const GridPtr& g, const Vol& v, Exec exec)
    : f_(LayeredField::from_physical(g, v, Jump::Discontinuous, true, exec)), exec_(exec) {}

Vol SpectralView::d(int dir) const { return f_.d(dir).physical(exec_); }

Vol SpectralView::dd(int a, int b) const {
  if (a == 2 && b == 2) return f_.d3(2).physical(exec_);
  return f_.d(a).d(b).physical(exec_);
}

}  // namespace siw
