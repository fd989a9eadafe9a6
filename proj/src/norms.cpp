#include "siw/norms.hpp"

#include <cmath>

namespace siw {

double sobolev_norm_sq_surface(const SurfaceField& f, double s) {
  const Grid& g = *f.grid();
  double acc = 0.0;
  for (int m = 0; m < g.nmodes(); ++m) acc += std::pow(1.0 + g.nabs2(m), s) * std::norm(f[m]);
  return g.area() * acc;
}

double volume_norm_sq(const LayeredField& f, int k) {
  if (k < 0 || k > 3) throw InvalidArgument("volume_norm supports 0 <= k <= 3");
  const Grid& g = *f.grid();
  const int nm = g.nmodes();
  double total = 0.0;
  for (Layer l : {Layer::Upper, Layer::Lower}) {
    const auto& w = g.layer(l).weights();
    const int nz = g.nz(l);
    // vertical derivative c of order 0..k, integrated per mode
    std::vector<Eigen::ArrayXd> vert(k + 1, Eigen::ArrayXd::Zero(nm));
    for (int c = 0; c <= k; ++c) {
      const Eigen::ArrayXcd data = c == 0 ? f.layer(l) : f.d3(c).layer(l);
      for (int j = 0; j < nz; ++j) vert[c] += w[j] * data.segment(j * nm, nm).abs2();
    }
    for (int m = 0; m < nm; ++m) {
      const double a1 = g.n1(m) * g.n1(m);
      const double a2 = g.n2(m) * g.n2(m);
      for (int a = 0; a <= k; ++a)
        for (int b = 0; a + b <= k; ++b)
          for (int c = 0; a + b + c <= k; ++c)
            total += std::pow(a1, a) * std::pow(a2, b) * vert[c][m];
    }
  }
  return g.area() * total;
}

double volume_norm_sq(const VectorField& v, int k) {
  return volume_norm_sq(v[0], k) + volume_norm_sq(v[1], k) + volume_norm_sq(v[2], k);
}

double integrate_layer(const Grid& g, const Vol& v, Layer l) {
  const int nm = g.nmodes();
  const auto& w = g.layer(l).weights();
  double acc = 0.0;
  for (int j = 0; j < g.nz(l); ++j) acc += w[j] * v.layer(l).segment(j * nm, nm).sum();
  return acc * g.area() / nm;
}

double integrate(const Grid& g, const Vol& v) {
  return integrate_layer(g, v, Layer::Upper) + integrate_layer(g, v, Layer::Lower);
}

double integrate_surface(const Grid& g, const Eigen::ArrayXd& s) { return s.sum() * g.area() / g.nmodes(); }

}  // namespace siw
