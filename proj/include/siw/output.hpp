#pragma once

#include "siw/config.hpp"
#include "siw/diagnostics.hpp"
#include "siw/stability.hpp"
#include "siw/state.hpp"

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

namespace siw {

const char* tool_version();

// "# "-prefixed header shared by every text output: tool version, config hash,
// grid, params and the full canonical config.
void write_header(std::ostream& os, const Config& c, const std::string& kind);
// Recovers the config embedded in a header written by write_header.
Config config_from_header(std::istream& in);

// <out>/<first 16 hex of the hash>-<UTC timestamp>, created; a numeric suffix
// is appended if the name is taken.
std::filesystem::path make_run_dir(const std::filesystem::path& out, const Config& c);

class EnergyCsv {
 public:
  EnergyCsv(const std::filesystem::path& path, const Config& c);
  void write(const EnergyReport& r);

 private:
  std::ofstream os_;
};

// Binary snapshot: the 8-byte magic "SIWSNAP1", a little-endian uint64 header
// length, a JSON header (version, config hash, time, grid, params, and a field
// table with names, layer tags, shapes and offsets), then raw complex
// coefficients as interleaved little-endian doubles.
void write_snapshot(const std::filesystem::path& path, const State& s, const Config& c);

struct Snapshot {
  State state;
  std::string version;
  std::string config_hash;
  FluidParams params;
};
// With a grid the dimensions must match it and the fields live on it;
// otherwise a grid is built from the header.
Snapshot read_snapshot(const std::filesystem::path& path, GridPtr grid = nullptr);

// Plain-text dump of a snapshot: header, then one line per coefficient.
void export_snapshot_text(const std::filesystem::path& path, std::ostream& os);

// Rate table: sigma_minus, k1, k2, rate (real part), imag, and with an oracle
// the dense rate and the relative difference.
struct RateRow {
  double sigma_minus = 0.0;
  Wavenumber n;
  cplx power{0.0};
  bool has_dense = false;
  cplx dense{0.0};
};
void write_rates_csv(const std::filesystem::path& path, const Config& c, const std::vector<RateRow>& rows);
void write_threshold_summary(const std::filesystem::path& path, const Config& c, const ThresholdScan& scan);

}  // namespace siw
