#pragma once

#include "siw/fields.hpp"
#include "siw/geometry.hpp"
#include "siw/params.hpp"

#include <array>

namespace siw {

// Forcing terms of one nonlinear step. In NoSurfaceTension mode the G members
// are filled, in SurfaceTension mode f and g.
struct ForcingSet {
  Mode mode = Mode::NoSurfaceTension;
  VectorField G1;
  LayeredField G2;
  SurfaceVector G3plus, G3minus;
  SurfaceField G4plus, G4minus;
  VectorField f;
  SurfaceVector gplus, gminus;
};

// Terms that turn the A-Stokes problem into a Stokes problem:
//   G1 = mu (Lap_A - Lap) u - (grad_A - grad) p,  G2 = (div - div_A) u,
//   G3+ = p (e3 - N) + mu (D_A u N - Du e3),
//   G3- = -([p] (e3 - N) + [mu (D_A u N - Du e3)]).
// Every geometric factor enters through a deviation from the flat state, so
// all terms are exactly zero when eta = 0.
struct StokesPerturbation {
  VectorField G1;
  LayeredField G2;
  SurfaceVector G3plus, G3minus;
};
StokesPerturbation a_stokes_perturbation(const VectorField& u, const LayeredField& p, const GeometryCache& cache,
                                         const FluidParams& params, Exec exec = Exec::Parallel);

// G1..G4 of the perturbed formulation without surface tension.
ForcingSet perturbations_no_st(const VectorField& u, const LayeredField& p, const GeometryCache& cache,
                               const FluidParams& params, Exec exec = Exec::Parallel);

// The nine groups of the momentum forcing f in physical space (index 0..8, in
// the order they are usually written), before dealiasing.
using ForcingGroups = std::array<std::array<Vol, 3>, 9>;
ForcingGroups forcing_f_groups(const VectorField& u, const LayeredField& p, const GeometryCache& cache,
                               const FluidParams& params, Exec exec = Exec::Parallel);
VectorField forcing_f(const VectorField& u, const LayeredField& p, const GeometryCache& cache,
                      const FluidParams& params, Exec exec = Exec::Parallel);

struct BoundaryForcing {
  SurfaceVector plus;
  SurfaceVector minus;
};
BoundaryForcing forcing_g(const VectorField& u, const GeometryCache& cache, const FluidParams& params,
                          Exec exec = Exec::Parallel);

// Mean curvature minus its linearization, H - Lap eta, from physical
// derivatives of eta.
Eigen::ArrayXd curvature_remainder(const Eigen::ArrayXd& d1, const Eigen::ArrayXd& d2, const Eigen::ArrayXd& d11,
                                   const Eigen::ArrayXd& d12, const Eigen::ArrayXd& d22);

// u3 + G4 on each surface, the kinematic velocity without surface tension.
SurfaceField kinematic_rate(const VectorField& u, const SurfaceField& eta, int surface);

}  // namespace siw
