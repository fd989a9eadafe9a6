#include "siw/output.hpp"

#include <json.hpp>

#include <bit>
#include <chrono>
#include <cstring>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <type_traits>

namespace siw {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'I', 'W', 'S', 'N', 'A', 'P', '1'};
constexpr int kSnapshotVersion = 1;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

std::string grid_text(const Config& c) {
  std::ostringstream os;
  os << "N1=" << c.N1 << " N2=" << c.N2 << " nz_plus=" << c.nz_plus << " nz_minus=" << c.nz_minus;
  return os.str();
}

std::string params_text(const FluidParams& p) {
  std::ostringstream os;
  os << "rho_plus=" << format_double(p.rho_plus) << " rho_minus=" << format_double(p.rho_minus)
     << " mu_plus=" << format_double(p.mu_plus) << " mu_minus=" << format_double(p.mu_minus)
     << " g=" << format_double(p.g) << " sigma_plus=" << format_double(p.sigma_plus)
     << " sigma_minus=" << format_double(p.sigma_minus) << " L1=" << format_double(p.L1)
     << " L2=" << format_double(p.L2) << " b0=" << format_double(p.b0);
  return os.str();
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

json params_json(const FluidParams& p) {
  return {{"rho_plus", p.rho_plus}, {"rho_minus", p.rho_minus}, {"mu_plus", p.mu_plus},
          {"mu_minus", p.mu_minus}, {"g", p.g},                 {"sigma_plus", p.sigma_plus},
          {"sigma_minus", p.sigma_minus}, {"L1", p.L1},         {"L2", p.L2},
          {"b0", p.b0}};
}

FluidParams params_from(const json& j) {
  FluidParams p;
  p.rho_plus = j.at("rho_plus");
  p.rho_minus = j.at("rho_minus");
  p.mu_plus = j.at("mu_plus");
  p.mu_minus = j.at("mu_minus");
  p.g = j.at("g");
  p.sigma_plus = j.at("sigma_plus");
  p.sigma_minus = j.at("sigma_minus");
  p.L1 = j.at("L1");
  p.L2 = j.at("L2");
  p.b0 = j.at("b0");
  return p;
}

// one coefficient block of the snapshot payload
template <class A>
struct Block {
  std::string name;
  std::string layer;  // upper | lower | top | interface
  A* data;
};

// S is State or const State
template <class S, class A = std::conditional_t<std::is_const_v<S>, const Eigen::ArrayXcd, Eigen::ArrayXcd>>
std::vector<Block<A>> blocks_of(S& s) {
  static const char* names[3] = {"u1", "u2", "u3"};
  std::vector<Block<A>> b;
  for (int i = 0; i < 3; ++i) {
    b.push_back({names[i], "upper", &s.u[i].layer(Layer::Upper)});
    b.push_back({names[i], "lower", &s.u[i].layer(Layer::Lower)});
  }
  b.push_back({"p", "upper", &s.p.layer(Layer::Upper)});
  b.push_back({"p", "lower", &s.p.layer(Layer::Lower)});
  if (s.p_prev.valid()) {
    b.push_back({"p_prev", "upper", &s.p_prev.layer(Layer::Upper)});
    b.push_back({"p_prev", "lower", &s.p_prev.layer(Layer::Lower)});
  }
  b.push_back({"eta_plus", "top", &s.eta_plus.coeffs()});
  b.push_back({"eta_minus", "interface", &s.eta_minus.coeffs()});
  return b;
}

struct RawSnapshot {
  json header;
  std::vector<double> payload;
};

RawSnapshot read_raw(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read snapshot '" + path.string() + "'");
  char magic[8];
  std::uint64_t hlen = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw InvalidArgument("'" + path.string() + "' is not a snapshot file");
  in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
  std::string text(hlen, '\0');
  if (!in.read(text.data(), std::streamsize(hlen))) throw InvalidArgument("snapshot header is truncated");
  RawSnapshot r;
  r.header = json::parse(text);
  if (r.header.at("format_version").get<int>() != kSnapshotVersion)
    throw InvalidArgument("unsupported snapshot format version");
  const std::size_t n = r.header.at("payload_doubles").get<std::size_t>();
  r.payload.resize(n);
  if (!in.read(reinterpret_cast<char*>(r.payload.data()), std::streamsize(n * sizeof(double))))
    throw InvalidArgument("snapshot payload is truncated");
  return r;
}

}  // namespace

const char* tool_version() { return SIWAVE_VERSION; }

void write_header(std::ostream& os, const Config& c, const std::string& kind) {
  os << "# siwave " << tool_version() << ' ' << kind << '\n';
  os << "# config_hash " << config_hash(c) << '\n';
  os << "# grid " << grid_text(c) << '\n';
  os << "# params " << params_text(c.physical) << '\n';
  std::istringstream canon(canonical_text(c));
  std::string line;
  while (std::getline(canon, line)) os << "# config " << line << '\n';
}

Config config_from_header(std::istream& in) {
  std::ostringstream text;
  std::string line;
  const std::string tag = "# config ";
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) != 0) break;
    if (line.rfind(tag, 0) == 0) text << line.substr(tag.size()) << '\n';
  }
  std::istringstream is(text.str());
  return parse_config(is);
}

fs::path make_run_dir(const fs::path& out, const Config& c) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << config_hash(c).substr(0, 16) << '-' << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  fs::create_directories(out);
  fs::path dir = out / name.str();
  for (int k = 1; fs::exists(dir); ++k) dir = out / (name.str() + "-" + std::to_string(k));
  fs::create_directory(dir);
  return dir;
}

EnergyCsv::EnergyCsv(const fs::path& path, const Config& c) : os_(open_out(path)) {
  write_header(os_, c, "energy");
  const auto& cols = energy_report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
  os_ << '\n';
}

void EnergyCsv::write(const EnergyReport& r) {
  const auto& cols = energy_report_columns();
  const std::vector<double> v = energy_report_values(r);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os_ << ',';
    // step and flags are integers
    if (cols[i] == "step" || cols[i].find("linearized") != std::string::npos || cols[i] == "dtp_missing")
      os_ << static_cast<long>(v[i]);
    else
      os_ << format_double(v[i]);
  }
  os_ << '\n';
  os_.flush();
}

void write_snapshot(const fs::path& path, const State& s, const Config& c) {
  const Grid& g = *s.grid();
  const auto blocks = blocks_of(s);
  json fields = json::array();
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    const std::size_t count = std::size_t(b.data->size());
    const bool volume = b.layer == "upper" || b.layer == "lower";
    const int nodes = b.layer == "upper" ? g.nz(Layer::Upper) : b.layer == "lower" ? g.nz(Layer::Lower) : 1;
    fields.push_back({{"name", b.name},
                      {"layer", b.layer},
                      {"shape", volume ? json::array({nodes, g.N1(), g.N2()}) : json::array({g.N1(), g.N2()})},
                      {"offset", offset},
                      {"count", count}});
    offset += 2 * count;
  }
  json h = {{"format_version", kSnapshotVersion},
            {"tool_version", tool_version()},
            {"config_hash", config_hash(c)},
            {"t", s.t},
            {"step", s.step},
            {"dt_prev", s.dt_prev},
            {"grid",
             {{"N1", g.N1()}, {"N2", g.N2()}, {"nz_plus", g.nz(Layer::Upper)}, {"nz_minus", g.nz(Layer::Lower)}}},
            {"params", params_json(c.physical)},
            {"encoding", "complex128 interleaved, little-endian, node-major, modes in FFT order"},
            {"fields", fields},
            {"payload_doubles", offset}};
  const std::string text = h.dump();
  const std::uint64_t hlen = text.size();

  // write to a sibling file first so a crash never leaves a torn snapshot
  const fs::path tmp = path.string() + ".part";
  {
    std::ofstream os = open_out(tmp, std::ios::binary);
    os.write(kMagic, 8);
    os.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    os.write(text.data(), std::streamsize(text.size()));
    for (const auto& b : blocks)
      os.write(reinterpret_cast<const char*>(b.data->data()), std::streamsize(b.data->size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("failed writing snapshot '" + path.string() + "'");
  }
  fs::rename(tmp, path);
}

Snapshot read_snapshot(const fs::path& path, GridPtr grid) {
  const RawSnapshot raw = read_raw(path);
  const json& h = raw.header;
  Snapshot out;
  out.version = h.at("tool_version");
  out.config_hash = h.at("config_hash");
  out.params = params_from(h.at("params"));
  const json& gj = h.at("grid");
  const int N1 = gj.at("N1"), N2 = gj.at("N2"), nzp = gj.at("nz_plus"), nzm = gj.at("nz_minus");
  if (grid) {
    if (grid->N1() != N1 || grid->N2() != N2 || grid->nz(Layer::Upper) != nzp || grid->nz(Layer::Lower) != nzm)
      throw InvalidArgument("snapshot grid does not match the configured grid");
  } else {
    grid = Grid::make(out.params.L1, out.params.L2, N1, N2, nzp, nzm, out.params.b0);
  }

  State& s = out.state;
  s = zero_state(grid);
  s.t = h.at("t");
  s.step = h.at("step");
  s.dt_prev = h.at("dt_prev");
  for (const json& f : h.at("fields")) {
    if (f.at("name") == "p_prev" && !s.p_prev.valid()) s.p_prev = LayeredField(grid, Jump::Discontinuous);
  }
  const auto blocks = blocks_of(s);
  const json& fields = h.at("fields");
  if (fields.size() != blocks.size()) throw InvalidArgument("snapshot field table does not match the state layout");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const json& f = fields[i];
    const auto& b = blocks[i];
    const std::size_t off = f.at("offset"), count = f.at("count");
    if (f.at("name") != b.name || f.at("layer") != b.layer || count != std::size_t(b.data->size()) ||
        off + 2 * count > raw.payload.size())
      throw InvalidArgument("snapshot field '" + b.name + "' (" + b.layer + ") is malformed");
    std::memcpy(static_cast<void*>(b.data->data()), raw.payload.data() + off, count * sizeof(cplx));
  }
  return out;
}

void export_snapshot_text(const fs::path& path, std::ostream& os) {
  const RawSnapshot raw = read_raw(path);
  std::istringstream pretty(raw.header.dump(2));
  std::string line;
  while (std::getline(pretty, line)) os << "# " << line << '\n';
  os << "field,layer,index,re,im\n";
  for (const json& f : raw.header.at("fields")) {
    const std::size_t off = f.at("offset"), count = f.at("count");
    const std::string name = f.at("name"), layer = f.at("layer");
    for (std::size_t k = 0; k < count; ++k)
      os << name << ',' << layer << ',' << k << ',' << format_double(raw.payload[off + 2 * k]) << ','
         << format_double(raw.payload[off + 2 * k + 1]) << '\n';
  }
}

void write_rates_csv(const fs::path& path, const Config& c, const std::vector<RateRow>& rows) {
  std::ofstream os = open_out(path);
  write_header(os, c, "rates");
  const bool oracle = !rows.empty() && rows.front().has_dense;
  os << "sigma_minus,k1,k2,rate_power,imag_power";
  if (oracle) os << ",rate_dense,imag_dense,rel_diff";
  os << '\n';
  for (const RateRow& r : rows) {
    os << format_double(r.sigma_minus) << ',' << r.n.k1 << ',' << r.n.k2 << ',' << format_double(r.power.real())
       << ',' << format_double(r.power.imag());
    if (oracle) {
      const double rel = std::abs(r.power - r.dense) / std::max(std::abs(r.dense), 1e-300);
      os << ',' << format_double(r.dense.real()) << ',' << format_double(r.dense.imag()) << ','
         << format_double(rel);
    }
    os << '\n';
  }
}

void write_threshold_summary(const fs::path& path, const Config& c, const ThresholdScan& scan) {
  std::ofstream os = open_out(path);
  write_header(os, c, "threshold");
  os << "sigma_c = " << format_double(scan.sigma_c) << '\n';
  if (scan.inactive) {
    os << "status = threshold inactive (density jump <= 0, every sigma_- is stable)\n";
    return;
  }
  os << "status = " << (scan.bracketed ? "bracketed" : "not bracketed") << '\n';
  os << "crossing = " << format_double(scan.crossing) << '\n';
  os << "bracket_lo = " << format_double(scan.lo) << '\n';
  os << "bracket_hi = " << format_double(scan.hi) << '\n';
  os << "relative_error = " << format_double(std::abs(scan.crossing - scan.sigma_c) / std::abs(scan.sigma_c))
     << '\n';
  os << "iterations = " << scan.iterations << '\n';
  for (const StabilityReport& s : scan.samples)
    os << "sample sigma_minus = " << format_double(s.sigma_minus) << " max_rate = " << format_double(s.max_rate)
       << " verdict = " << to_string(s.verdict) << '\n';
}

}  // namespace siw
