#pragma once

#include "siw/fields.hpp"
#include "siw/params.hpp"

#include <cstdint>
#include <vector>

namespace siw {

double critical_sigma(const FluidParams& p);

struct CoercivityResult {
  double lhs = 0.0;  // sigma_- ||grad eta||^2 - [rho] g ||eta||^2
  double rhs = 0.0;  // (sigma_- - sigma_c) ||grad eta||^2, or sigma_- ||grad eta||^2 when [rho] <= 0
  double margin = 0.0;
};
// Throws InvalidArgument when eta has a nonzero mean.
CoercivityResult coercivity_check(const SurfaceField& eta, const FluidParams& p);

struct Wavenumber {
  int k1 = 0;
  int k2 = 0;
  bool operator==(const Wavenumber&) const = default;
};

enum class RateMethod { Power, Dense };

struct RateOptions {
  int nz = 24;          // Chebyshev nodes per layer
  bool surface_tension = true;
  int max_steps = 2000;
  double tol = 1e-8;    // |change| < tol * max(1, |lambda|)
  std::uint64_t seed = 12345;
};

struct RateResult {
  cplx lambda{0.0};  // rightmost eigenvalue of the linearized single-mode system
  int steps = 0;
  double last_change = 0.0;
};

// Throws InvalidArgument for n = 0 or nz < 8, ConvergenceError when the power
// method does not settle within max_steps.
RateResult mode_rate(const Wavenumber& n, const FluidParams& p, RateMethod method, const RateOptions& o = {});
inline double growth_rate(const Wavenumber& n, const FluidParams& p, RateMethod method, const RateOptions& o = {}) {
  return mode_rate(n, p, method, o).lambda.real();
}

// Rightmost eigenpair of one mode on the vertical grid of g, found with the
// power method. The velocity and elevations form a real field (the mode plus
// its conjugate) scaled so that the larger surface amplitude equals amplitude.
struct Eigenmode {
  cplx lambda{0.0};
  VectorField u;
  SurfaceField eta_plus, eta_minus;
};
Eigenmode linear_eigenmode(const GridPtr& g, const Wavenumber& n, const FluidParams& p, bool surface_tension,
                           double amplitude, std::uint64_t seed = 12345);

// Nonzero wavenumbers with |k| <= kmax, one of each pair (k, -k).
std::vector<Wavenumber> mode_set(int kmax);

enum class Verdict { Stable, Marginal, Unstable };
const char* to_string(Verdict v);

struct ModeRate {
  Wavenumber n;
  cplx lambda;
};

struct StabilityReport {
  double sigma_minus = 0.0;
  double sigma_c = 0.0;
  std::vector<ModeRate> rates;
  double max_rate = 0.0;
  Verdict verdict = Verdict::Stable;
};

// Rates of every mode of the set; modes are evaluated in parallel.
StabilityReport stability_report(const FluidParams& p, const std::vector<Wavenumber>& modes, RateMethod method,
                                 const RateOptions& o = {}, double rate_tol = 1e-8, Exec exec = Exec::Parallel);

struct ThresholdScan {
  bool inactive = false;   // [rho] <= 0: no threshold
  bool bracketed = false;  // max rate changes sign over the bracket
  double sigma_c = 0.0;
  double crossing = 0.0;
  double lo = 0.0, hi = 0.0;  // final bracket
  int iterations = 0;
  std::vector<StabilityReport> samples;  // every evaluated sigma_-, in order
};

// Bisection on sigma_- over [lo, hi] for the zero crossing of the maximal rate.
ThresholdScan rt_threshold_scan(const FluidParams& p, double lo, double hi, const std::vector<Wavenumber>& modes,
                                RateMethod method, const RateOptions& o = {}, double rel_tol = 1e-6,
                                Exec exec = Exec::Parallel);

}  // namespace siw
