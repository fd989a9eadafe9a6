#pragma once

#include "siw/diagnostics.hpp"
#include "siw/geometry.hpp"
#include "siw/mode_system.hpp"
#include "siw/state.hpp"

#include <functional>
#include <string>
#include <vector>

namespace siw {

struct CompatibilityReport {
  double top = 0.0;        // max |Pi (g+ + mu+ Du e3)| on the top surface
  double interface = 0.0;  // max |Pi (g- - [mu Du] e3)| on the interface
  bool pass = true;
};

// Tangential stress compatibility of the initial data. With surface tension
// g is forcing_g(u0); without it the G3 terms of the perturbed form are used
// (p0 may be invalid, then taken as zero).
CompatibilityReport check_compatibility(const VectorField& u0, const LayeredField& p0, const SurfaceField& eta_plus,
                                        const SurfaceField& eta_minus, const FluidParams& params, Mode mode,
                                        const ExtensionSpec& spec = default_extension(), double threshold = 1e-8,
                                        Exec exec = Exec::Parallel);

// Data frozen over one implicit step. K is added to u3 in the kinematic
// update (G4 without surface tension). Invalid members count as zero.
struct LinearForcing {
  VectorField F1;
  LayeredField F2;
  SurfaceVector top, jump;
  SurfaceField K_plus, K_minus;
};

// Backward Euler step of the linear two-layer system with the surface
// elevation eliminated through eta^{n+1} = eta^n + dt (u3^{n+1} + K). The mode
// factorizations are computed once per (grid, dt).
class LinearStepper {
 public:
  LinearStepper(GridPtr grid, const FluidParams& params, double dt, Mode mode, Exec exec = Exec::Parallel,
                bool cache = true);
  State step(const State& s, const LinearForcing& f) const;
  double dt() const { return dt_; }
  Mode mode() const { return mode_; }
  const FluidParams& params() const { return params_; }
  const GridPtr& grid() const { return grid_; }

 private:
  GridPtr grid_;
  FluidParams params_;
  double dt_;
  Mode mode_;
  Exec exec_;
  ModeSolverBank bank_;
};

State step_linear_implicit(const State& s, const LinearForcing& f, double dt, Mode mode, const FluidParams& params,
                           Exec exec = Exec::Parallel);

struct NonlinearOptions {
  ExtensionSpec spec = default_extension();
  // Without surface tension each step is iterated at the new time level until
  // the relative change drops below picard_tol; picard_max = 0 keeps the plain
  // explicit treatment.
  double picard_tol = 1e-10;
  int picard_max = 30;
  double j_floor = 0.1;
  Exec exec = Exec::Parallel;
};

class NonlinearStepper {
 public:
  NonlinearStepper(GridPtr grid, const FluidParams& params, double dt, Mode mode,
                   NonlinearOptions opts = NonlinearOptions{});
  // Throws DiffeoError if the current surfaces fail check_diffeo,
  // ConvergenceError if the corrector does not settle.
  State step(const State& s) const;
  int last_corrections() const { return last_corrections_; }
  const LinearStepper& linear() const { return linear_; }

 private:
  ForcingSet forcing(const State& s) const;
  LinearForcing frozen(const ForcingSet& f) const;

  LinearStepper linear_;
  NonlinearOptions opts_;
  mutable int last_corrections_ = 0;
};

State step_nonlinear(const State& s, double dt, Mode mode, const FluidParams& params,
                     const NonlinearOptions& opts = NonlinearOptions{});

struct RunOptions {
  double dt = 1e-3;
  double t_end = 0.0;
  Mode mode = Mode::SurfaceTension;
  bool linear = false;  // homogeneous linear system instead of the full one
  int diagnostics_every = 1;
  int snapshot_every = 0;
  // report the starting state; off when resuming from a snapshot whose report
  // was already written
  bool report_initial = true;
  NonlinearOptions nonlinear;
};

struct RunObserver {
  std::function<void(const State&, const EnergyReport&)> on_report;
  std::function<void(const State&)> on_snapshot;
};

struct RunResult {
  State final;
  std::vector<EnergyReport> reports;
  bool aborted = false;
  std::string abort_reason;
};

// Fixed-step integration from s to t_end. A diffeomorphism failure or a
// corrector that does not settle ends the run early: the last good state is
// passed to on_snapshot and the result is flagged as aborted.
RunResult run(State s, const RunOptions& opts, const FluidParams& params, const RunObserver& obs = {});

}  // namespace siw
