#pragma once

#include "siw/fields.hpp"

namespace siw {

// sum_n (1+|n|^2)^s |f^(n)|^2 with the normalized Fourier basis
double sobolev_norm_sq_surface(const SurfaceField& f, double s);
inline double sobolev_norm_surface(const SurfaceField& f, double s) {
  return std::sqrt(sobolev_norm_sq_surface(f, s));
}

// sum over both layers and all multi-indices |alpha| <= k of ||d^alpha f||^2
double volume_norm_sq(const LayeredField& f, int k);
inline double volume_norm(const LayeredField& f, int k) { return std::sqrt(volume_norm_sq(f, k)); }
double volume_norm_sq(const VectorField& v, int k);

// plain L2 inner product over Omega of two physical fields (quadrature)
double integrate(const Grid& g, const Vol& v);
// integral over one layer
double integrate_layer(const Grid& g, const Vol& v, Layer l);
// integral over T^2 of a physical surface slice
double integrate_surface(const Grid& g, const Eigen::ArrayXd& s);

}  // namespace siw
