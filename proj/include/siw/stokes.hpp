#pragma once

#include "siw/fields.hpp"
#include "siw/geometry.hpp"
#include "siw/mode_system.hpp"
#include "siw/params.hpp"

#include <vector>

namespace siw {

// Data of the stationary two-phase Stokes problem
//   -mu Lap u + grad p = F1, div u = F2 in each layer,
//   (p I - mu Du) e3 = F3+ at x3 = 1,
//   [u] = 0, [(p I - mu Du) e3] = -F3- at x3 = 0, u = 0 at x3 = -b0.
// Invalid members count as zero.
struct StokesData {
  VectorField F1;
  LayeredField F2;
  SurfaceVector F3plus, F3minus;
};

struct StokesSolution {
  VectorField u;
  LayeredField p;
};

// Keeps one LU factorization per canonical mode, so repeated solves on the same
// grid only pay for the back substitution.
class StokesSolver {
 public:
  StokesSolver(GridPtr grid, const FluidParams& params, Exec exec = Exec::Parallel, bool cache = true);
  StokesSolution solve(const StokesData& data) const;
  const GridPtr& grid() const { return grid_; }
  const FluidParams& params() const { return params_; }

 private:
  GridPtr grid_;
  FluidParams params_;
  ModeSolverBank bank_;
};

StokesSolution solve_two_phase_stokes(const GridPtr& grid, const StokesData& data, const FluidParams& params,
                                      Exec exec = Exec::Parallel);

// Relative residuals of every equation group; each is normalized by the
// largest term entering that group.
struct StokesResidual {
  double momentum = 0, divergence = 0, top = 0, continuity = 0, stress_jump = 0, bottom = 0;
  double max() const;
};
StokesResidual stokes_residual(const StokesSolution& sol, const StokesData& data, const FluidParams& params);

// v with div v = target, [v] = 0 at the interface and v = 0 at the bottom:
// v = -grad phi + w, where -Lap phi = target, phi = 0 on top, phi and d3 phi
// continuous, d3 phi = 0 at the bottom, and w is a divergence-free cubic in
// the lower layer that cancels the tangential bottom trace of -grad phi.
VectorField divergence_adjust(const LayeredField& target, Exec exec = Exec::Parallel);
// phi of the construction above (exposed for testing)
LayeredField divergence_potential(const LayeredField& target, Exec exec = Exec::Parallel);

// rho^{-1} (d3^2 - |n|^2) p = f1 per layer, p = f2 on top, [p] = f3 and
// [rho^{-1} d3 p] = f4 at the interface, -rho_-^{-1} d3 p = f5 at the bottom.
// Invalid surface data count as zero.
LayeredField solve_two_phase_poisson(const LayeredField& f1, const SurfaceField& f2, const SurfaceField& f3,
                                     const SurfaceField& f4, const SurfaceField& f5, const FluidParams& params,
                                     Exec exec = Exec::Parallel);

struct AStokesResult {
  StokesSolution sol;
  int iterations = 0;            // number of corrections after the initial Stokes solve
  std::vector<double> updates;   // relative update of each correction
  double residual = 0.0;         // residual of the A-system at the returned state
};

// Successive approximation x_{k+1} = S(data + G(x_k)), starting from the plain
// Stokes solution. Throws NonContractionError after max_iter corrections.
AStokesResult solve_A_stokes(const StokesData& data, const GeometryCache& cache, const FluidParams& params,
                             double tol = 1e-10, int max_iter = 50, Exec exec = Exec::Parallel);

// Pressure at t = 0 from u0, the surface elevations, the momentum forcing f0
// and the boundary data (g+ and g- with surface tension, G3+ and G3- without).
LayeredField initial_pressure(const VectorField& u0, const SurfaceField& eta_plus, const SurfaceField& eta_minus,
                              const VectorField& f0, const SurfaceVector& top, const SurfaceVector& jump,
                              const FluidParams& params, Mode mode, Exec exec = Exec::Parallel);

}  // namespace siw
