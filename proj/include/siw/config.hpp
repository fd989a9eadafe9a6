#pragma once

#include "siw/geometry.hpp"
#include "siw/params.hpp"
#include "siw/state.hpp"
#include "siw/stability.hpp"
#include "siw/timestepper.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace siw {

// Flat INI text, one section per group:
//
//   [physical] rho_plus rho_minus mu_plus mu_minus g sigma_plus sigma_minus L1 L2 b0
//   [grid]     N1 N2 nz_plus nz_minus
//   [extension] m lambdas            (lambdas: m + 1 increasing values)
//   [run]      dt t_end scheme mode linear diagnostics_every snapshot_every threads
//   [initial]  kind amplitude k1 k2 surface kmax seed file
//   [tolerances] picard_tol picard_max j_floor compatibility
//   [stability] method nz kmax sigma_lo sigma_hi sigma rel_tol seed
//
// Every key is optional; missing keys keep the defaults below.

enum class InitialKind { Zero, SingleMode, Random, Eigenmode, File };

struct InitialSpec {
  InitialKind kind = InitialKind::SingleMode;
  double amplitude = 1e-3;
  int k1 = 1, k2 = 0;
  std::string surface = "both";  // plus | minus | both
  int kmax = 2;                  // random: modes with 0 < |k| <= kmax
  std::uint64_t seed = 1;
  std::string file;              // snapshot to start from
};

struct StabilitySpec {
  RateMethod method = RateMethod::Power;
  int nz = 24;
  int kmax = 2;
  double sigma_lo = 0.25, sigma_hi = 2.0;  // threshold bracket for sigma_-
  std::vector<double> sigma;               // sigma_- values of the rate table
  double rel_tol = 1e-6;
  std::uint64_t seed = 12345;
};

struct Config {
  // the default mode needs surface tension on both surfaces
  FluidParams physical = [] {
    FluidParams p;
    p.sigma_plus = p.sigma_minus = 1.0;
    return p;
  }();
  int N1 = 16, N2 = 16, nz_plus = 24, nz_minus = 24;
  std::vector<double> lambdas{1.0, 2.0, 4.0, 8.0, 16.0};

  double dt = 1e-3;
  double t_end = 1.0;
  std::string scheme = "euler";
  Mode mode = Mode::SurfaceTension;
  bool linear = false;
  int diagnostics_every = 1;
  int snapshot_every = 0;
  int threads = 0;  // 0 keeps the OpenMP default

  InitialSpec initial;

  double picard_tol = 1e-10;
  int picard_max = 30;
  double j_floor = 0.1;
  double compatibility = 1e-8;

  StabilitySpec stability;
};

struct ConfigError : InvalidArgument {
  explicit ConfigError(std::vector<std::string> v);
  std::vector<std::string> violations;
};

// Parses and validates; throws ConfigError listing every problem found.
Config parse_config(std::istream& in);
Config load_config(const std::string& path);
std::vector<std::string> config_violations(const Config& c);

// Sorted "section.key = value" lines with shortest round-trip numbers. Feeding
// the text back through parse_config gives the same Config.
std::string canonical_text(const Config& c);
// SHA-256 of the canonical text, lowercase hex.
std::string config_hash(const Config& c);

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

GridPtr make_grid(const Config& c);
ExtensionSpec make_extension(const Config& c);
RunOptions make_run_options(const Config& c, Exec exec = Exec::Parallel);
RateOptions make_rate_options(const Config& c);

// Builds the initial state of the configured preset. The pressure solves the
// pressure problem for the initial velocity and elevations, with the
// nonlinear terms lagged for a few passes.
State make_initial_state(const Config& c, const GridPtr& g, Exec exec = Exec::Parallel);

}  // namespace siw
