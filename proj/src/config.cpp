#include "siw/config.hpp"

#include "siw/output.hpp"
#include "siw/stokes.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace siw {

namespace pt = boost::property_tree;

namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// ini_parser only knows whole-line ';' comments; strip '#' and ';' anywhere
std::string strip_comments(std::istream& in) {
  std::ostringstream os;
  std::string line;
  while (std::getline(in, line)) {
    const auto c = line.find_first_of("#;");
    if (c != std::string::npos) line.erase(c);
    os << trim(line) << '\n';
  }
  return os.str();
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  if (b != e && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

  template <class T>
  void get(const std::string& sec, const std::string& key, T& out) {
    const auto raw = find(sec, key);
    if (!raw) return;
    if (!convert(trim(*raw), out)) errors_.push_back(sec + "." + key + " = '" + trim(*raw) + "' is not " + what(out));
  }

  template <class E>
  void get_enum(const std::string& sec, const std::string& key, E& out,
                const std::vector<std::pair<std::string, E>>& names) {
    const auto raw = find(sec, key);
    if (!raw) return;
    const std::string v = trim(*raw);
    std::vector<std::string> allowed;
    for (const auto& [n, e] : names) {
      if (v == n) {
        out = e;
        return;
      }
      allowed.push_back(n);
    }
    errors_.push_back(sec + "." + key + " = '" + v + "' must be one of " + join(allowed, ", "));
  }

  void unknown_keys() {
    for (const auto& [sec, sub] : tree_) {
      if (sub.empty() && !sub.data().empty()) {
        errors_.push_back("key '" + sec + "' appears outside a section");
        continue;
      }
      for (const auto& [key, _] : sub)
        if (!used_.count(sec + "." + key)) errors_.push_back("unknown key " + sec + "." + key);
    }
  }

 private:
  std::optional<std::string> find(const std::string& sec, const std::string& key) {
    used_.insert(sec + "." + key);
    const auto s = tree_.get_child_optional(sec);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  static bool convert(const std::string& s, double& out) { return parse_number(s, out); }
  static bool convert(const std::string& s, int& out) { return parse_number(s, out); }
  static bool convert(const std::string& s, std::uint64_t& out) { return parse_number(s, out); }
  static bool convert(const std::string& s, std::string& out) {
    out = s;
    return true;
  }
  static bool convert(const std::string& s, bool& out) {
    if (s == "true" || s == "1" || s == "yes") return out = true, true;
    if (s == "false" || s == "0" || s == "no") return out = false, true;
    return false;
  }
  static bool convert(const std::string& s, std::vector<double>& out) {
    std::string t = s;
    for (char& ch : t)
      if (ch == ',') ch = ' ';
    std::istringstream is(t);
    std::vector<double> v;
    std::string tok;
    while (is >> tok) {
      double x;
      if (!parse_number(tok, x)) return false;
      v.push_back(x);
    }
    out = std::move(v);
    return true;
  }
  static const char* what(double) { return "a number"; }
  static const char* what(int) { return "an integer"; }
  static const char* what(std::uint64_t) { return "a non-negative integer"; }
  static const char* what(const std::string&) { return "a string"; }
  static const char* what(bool) { return "true or false"; }
  static const char* what(const std::vector<double>&) { return "a list of numbers"; }

  const pt::ptree& tree_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
};

const std::vector<std::pair<std::string, Mode>> kModes{{"surface_tension", Mode::SurfaceTension},
                                                       {"no_surface_tension", Mode::NoSurfaceTension}};
const std::vector<std::pair<std::string, InitialKind>> kKinds{{"zero", InitialKind::Zero},
                                                              {"single_mode", InitialKind::SingleMode},
                                                              {"random", InitialKind::Random},
                                                              {"eigenmode", InitialKind::Eigenmode},
                                                              {"file", InitialKind::File}};
const std::vector<std::pair<std::string, RateMethod>> kMethods{{"power", RateMethod::Power},
                                                               {"dense", RateMethod::Dense}};

template <class E>
std::string name_of(E e, const std::vector<std::pair<std::string, E>>& names) {
  for (const auto& [n, v] : names)
    if (v == e) return n;
  return "?";
}

std::string list_text(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(format_double(x));
  return join(s, " ");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> v)
    : InvalidArgument("invalid configuration:\n  " + join(v, "\n  ")), violations(std::move(v)) {}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Config parse_config(std::istream& in) {
  std::istringstream clean(strip_comments(in));
  pt::ptree tree;
  try {
    pt::read_ini(clean, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({std::string("config syntax: ") + e.message() + " at line " + std::to_string(e.line())});
  }

  Config c;
  std::vector<std::string> errors;
  Reader r(tree, errors);
  FluidParams& p = c.physical;
  r.get("physical", "rho_plus", p.rho_plus);
  r.get("physical", "rho_minus", p.rho_minus);
  r.get("physical", "mu_plus", p.mu_plus);
  r.get("physical", "mu_minus", p.mu_minus);
  r.get("physical", "g", p.g);
  r.get("physical", "sigma_plus", p.sigma_plus);
  r.get("physical", "sigma_minus", p.sigma_minus);
  r.get("physical", "L1", p.L1);
  r.get("physical", "L2", p.L2);
  r.get("physical", "b0", p.b0);

  r.get("grid", "N1", c.N1);
  r.get("grid", "N2", c.N2);
  r.get("grid", "nz_plus", c.nz_plus);
  r.get("grid", "nz_minus", c.nz_minus);

  int m = -1;
  r.get("extension", "m", m);
  r.get("extension", "lambdas", c.lambdas);
  if (m >= 0 && m + 1 != int(c.lambdas.size()))
    errors.push_back("extension.m = " + std::to_string(m) + " needs m + 1 lambdas, got " +
                     std::to_string(c.lambdas.size()));

  r.get("run", "dt", c.dt);
  r.get("run", "t_end", c.t_end);
  r.get("run", "scheme", c.scheme);
  r.get_enum("run", "mode", c.mode, kModes);
  r.get("run", "linear", c.linear);
  r.get("run", "diagnostics_every", c.diagnostics_every);
  r.get("run", "snapshot_every", c.snapshot_every);
  r.get("run", "threads", c.threads);

  InitialSpec& ic = c.initial;
  r.get_enum("initial", "kind", ic.kind, kKinds);
  r.get("initial", "amplitude", ic.amplitude);
  r.get("initial", "k1", ic.k1);
  r.get("initial", "k2", ic.k2);
  r.get("initial", "surface", ic.surface);
  r.get("initial", "kmax", ic.kmax);
  r.get("initial", "seed", ic.seed);
  r.get("initial", "file", ic.file);

  r.get("tolerances", "picard_tol", c.picard_tol);
  r.get("tolerances", "picard_max", c.picard_max);
  r.get("tolerances", "j_floor", c.j_floor);
  r.get("tolerances", "compatibility", c.compatibility);

  StabilitySpec& st = c.stability;
  r.get_enum("stability", "method", st.method, kMethods);
  r.get("stability", "nz", st.nz);
  r.get("stability", "kmax", st.kmax);
  r.get("stability", "sigma_lo", st.sigma_lo);
  r.get("stability", "sigma_hi", st.sigma_hi);
  r.get("stability", "sigma", st.sigma);
  r.get("stability", "rel_tol", st.rel_tol);
  r.get("stability", "seed", st.seed);

  r.unknown_keys();
  for (auto& v : config_violations(c)) errors.push_back(std::move(v));
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  return parse_config(in);
}

std::vector<std::string> config_violations(const Config& c) {
  std::vector<std::string> out;
  for (const auto& v : violations(c.physical)) out.push_back("physical." + v);
  if (c.mode == Mode::SurfaceTension && !(c.physical.sigma_plus > 0.0 && c.physical.sigma_minus > 0.0))
    out.push_back("physical.sigma_plus and physical.sigma_minus must be positive when run.mode = surface_tension");

  auto even = [&](int v, const char* name) {
    if (v < 4 || v % 2)
      out.push_back(std::string("grid.") + name + " = " + std::to_string(v) + " must be even and >= 4");
  };
  even(c.N1, "N1");
  even(c.N2, "N2");
  if (c.nz_plus < 6) out.push_back("grid.nz_plus = " + std::to_string(c.nz_plus) + " must be >= 6");
  if (c.nz_minus < 6) out.push_back("grid.nz_minus = " + std::to_string(c.nz_minus) + " must be >= 6");

  try {
    vandermonde_coeffs(c.lambdas);
  } catch (const std::exception& e) {
    out.push_back(std::string("extension.lambdas: ") + e.what());
  }

  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) out.push_back("run.dt must be positive");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) out.push_back("run.t_end must be >= 0");
  if (c.dt > 0.0 && c.t_end >= 0.0) {
    const double steps = c.t_end / c.dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
      out.push_back("run.t_end = " + format_double(c.t_end) + " is not a whole number of steps of run.dt = " +
                    format_double(c.dt));
  }
  if (c.scheme != "euler") out.push_back("run.scheme = '" + c.scheme + "' is not available; use euler");
  if (c.diagnostics_every < 1) out.push_back("run.diagnostics_every must be >= 1");
  if (c.snapshot_every < 0) out.push_back("run.snapshot_every must be >= 0 (0 disables snapshots)");
  if (c.threads < 0) out.push_back("run.threads must be >= 0 (0 keeps the default)");

  const InitialSpec& ic = c.initial;
  if (!std::isfinite(ic.amplitude)) out.push_back("initial.amplitude must be finite");
  if (ic.surface != "plus" && ic.surface != "minus" && ic.surface != "both")
    out.push_back("initial.surface = '" + ic.surface + "' must be one of plus, minus, both");
  if (ic.kind == InitialKind::SingleMode || ic.kind == InitialKind::Eigenmode) {
    if (ic.k1 == 0 && ic.k2 == 0) out.push_back("initial.k1 and initial.k2 cannot both be zero");
    if (c.N1 >= 4 && std::abs(ic.k1) > c.N1 / 3)
      out.push_back("initial.k1 = " + std::to_string(ic.k1) + " lies outside the resolved band |k1| <= N1/3 = " +
                    std::to_string(c.N1 / 3));
    if (c.N2 >= 4 && std::abs(ic.k2) > c.N2 / 3)
      out.push_back("initial.k2 = " + std::to_string(ic.k2) + " lies outside the resolved band |k2| <= N2/3 = " +
                    std::to_string(c.N2 / 3));
  }
  if (ic.kind == InitialKind::Random && ic.kmax < 1) out.push_back("initial.kmax must be >= 1");
  if (ic.kind == InitialKind::File && ic.file.empty()) out.push_back("initial.file is required for kind = file");

  if (!(c.picard_tol > 0.0)) out.push_back("tolerances.picard_tol must be positive");
  if (c.picard_max < 0) out.push_back("tolerances.picard_max must be >= 0");
  if (!(c.j_floor > 0.0 && c.j_floor < 1.0)) out.push_back("tolerances.j_floor must lie in (0, 1)");
  if (!(c.compatibility > 0.0)) out.push_back("tolerances.compatibility must be positive");

  const StabilitySpec& st = c.stability;
  if (st.nz < 8) out.push_back("stability.nz = " + std::to_string(st.nz) + " must be >= 8");
  if (st.kmax < 1) out.push_back("stability.kmax must be >= 1");
  if (!(st.sigma_lo >= 0.0 && st.sigma_hi > st.sigma_lo))
    out.push_back("stability.sigma_lo and stability.sigma_hi must satisfy 0 <= sigma_lo < sigma_hi");
  for (double s : st.sigma)
    if (!(s >= 0.0)) out.push_back("stability.sigma values must be >= 0");
  if (!(st.rel_tol > 0.0)) out.push_back("stability.rel_tol must be positive");
  return out;
}

std::string canonical_text(const Config& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [&](const char* k, double v) { kv(k, format_double(v)); };
  const FluidParams& p = c.physical;
  os << "[physical]\n";
  num("rho_plus", p.rho_plus);
  num("rho_minus", p.rho_minus);
  num("mu_plus", p.mu_plus);
  num("mu_minus", p.mu_minus);
  num("g", p.g);
  num("sigma_plus", p.sigma_plus);
  num("sigma_minus", p.sigma_minus);
  num("L1", p.L1);
  num("L2", p.L2);
  num("b0", p.b0);
  os << "[grid]\n";
  kv("N1", std::to_string(c.N1));
  kv("N2", std::to_string(c.N2));
  kv("nz_plus", std::to_string(c.nz_plus));
  kv("nz_minus", std::to_string(c.nz_minus));
  os << "[extension]\n";
  kv("m", std::to_string(int(c.lambdas.size()) - 1));
  kv("lambdas", list_text(c.lambdas));
  os << "[run]\n";
  num("dt", c.dt);
  num("t_end", c.t_end);
  kv("scheme", c.scheme);
  kv("mode", name_of(c.mode, kModes));
  kv("linear", c.linear ? "true" : "false");
  kv("diagnostics_every", std::to_string(c.diagnostics_every));
  kv("snapshot_every", std::to_string(c.snapshot_every));
  kv("threads", std::to_string(c.threads));
  os << "[initial]\n";
  kv("kind", name_of(c.initial.kind, kKinds));
  num("amplitude", c.initial.amplitude);
  kv("k1", std::to_string(c.initial.k1));
  kv("k2", std::to_string(c.initial.k2));
  kv("surface", c.initial.surface);
  kv("kmax", std::to_string(c.initial.kmax));
  kv("seed", std::to_string(c.initial.seed));
  kv("file", c.initial.file);
  os << "[tolerances]\n";
  num("picard_tol", c.picard_tol);
  kv("picard_max", std::to_string(c.picard_max));
  num("j_floor", c.j_floor);
  num("compatibility", c.compatibility);
  os << "[stability]\n";
  kv("method", name_of(c.stability.method, kMethods));
  kv("nz", std::to_string(c.stability.nz));
  kv("kmax", std::to_string(c.stability.kmax));
  num("sigma_lo", c.stability.sigma_lo);
  num("sigma_hi", c.stability.sigma_hi);
  kv("sigma", list_text(c.stability.sigma));
  num("rel_tol", c.stability.rel_tol);
  kv("seed", std::to_string(c.stability.seed));
  return os.str();
}

std::string config_hash(const Config& c) {
  // the thread count does not change results, so it stays out of the hash
  Config h = c;
  h.threads = 0;
  const std::string text = canonical_text(h);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw SolverError("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

GridPtr make_grid(const Config& c) {
  return Grid::make(c.physical.L1, c.physical.L2, c.N1, c.N2, c.nz_plus, c.nz_minus, c.physical.b0);
}

ExtensionSpec make_extension(const Config& c) { return vandermonde_coeffs(c.lambdas); }

RunOptions make_run_options(const Config& c, Exec exec) {
  RunOptions o;
  o.dt = c.dt;
  o.t_end = c.t_end;
  o.mode = c.mode;
  o.linear = c.linear;
  o.diagnostics_every = c.diagnostics_every;
  o.snapshot_every = c.snapshot_every;
  o.nonlinear.spec = make_extension(c);
  o.nonlinear.picard_tol = c.picard_tol;
  o.nonlinear.picard_max = c.picard_max;
  o.nonlinear.j_floor = c.j_floor;
  o.nonlinear.exec = exec;
  return o;
}

RateOptions make_rate_options(const Config& c) {
  RateOptions o;
  o.nz = c.stability.nz;
  o.surface_tension = c.mode == Mode::SurfaceTension;
  o.seed = c.stability.seed;
  return o;
}

namespace {

SurfaceField random_surface(const GridPtr& g, int kmax, double amplitude, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  SurfaceField f(g);
  for (int m : g->canonical_modes()) {
    const int k1 = g->k1(m), k2 = g->k2(m);
    const int k2sum = k1 * k1 + k2 * k2;
    if (k2sum == 0 || k2sum > kmax * kmax || !g->in_band(m)) continue;
    const double re = nd(rng);
    f[m] = cplx(re, nd(rng));
    f[g->conj_index(m)] = std::conj(f[m]);
  }
  const double peak = f.physical().abs().maxCoeff();
  if (peak > 0.0) f *= amplitude / peak;
  return f;
}

LayeredField lagged_pressure(const State& s, const FluidParams& prm, Mode mode, const ExtensionSpec& spec,
                             Exec exec) {
  LayeredField p =
      initial_pressure(s.u, s.eta_plus, s.eta_minus, VectorField{}, SurfaceVector{}, SurfaceVector{}, prm, mode, exec);
  for (int pass = 0; pass < 3; ++pass) {
    if (mode == Mode::SurfaceTension) {
      const GeometryCache c = build_geometry(s.eta_plus, s.eta_minus, s.u[2].trace_top(),
                                             s.u[2].trace_interface(Layer::Lower), prm, spec, exec);
      const VectorField f0 = forcing_f(s.u, p, c, prm, exec);
      const BoundaryForcing b = forcing_g(s.u, c, prm, exec);
      p = initial_pressure(s.u, s.eta_plus, s.eta_minus, f0, b.plus, b.minus, prm, mode, exec);
    } else {
      const GeometryCache c = build_geometry(s.eta_plus, s.eta_minus, kinematic_rate(s.u, s.eta_plus, 0),
                                             kinematic_rate(s.u, s.eta_minus, 1), prm, spec, exec);
      const ForcingSet f = perturbations_no_st(s.u, p, c, prm, exec);
      p = initial_pressure(s.u, s.eta_plus, s.eta_minus, f.G1, f.G3plus, f.G3minus, prm, mode, exec);
    }
  }
  return p;
}

}  // namespace

State make_initial_state(const Config& c, const GridPtr& g, Exec exec) {
  const InitialSpec& ic = c.initial;
  if (ic.kind == InitialKind::File) return read_snapshot(ic.file, g).state;

  State s = zero_state(g);
  const bool plus = ic.surface != "minus", minus = ic.surface != "plus";
  switch (ic.kind) {
    case InitialKind::Zero:
      return s;
    case InitialKind::SingleMode: {
      const SurfaceField eta = SurfaceField::cosine(g, ic.k1, ic.k2, ic.amplitude);
      if (plus) s.eta_plus = eta;
      if (minus) s.eta_minus = eta;
      break;
    }
    case InitialKind::Random: {
      std::mt19937_64 rng(ic.seed);
      if (plus) s.eta_plus = random_surface(g, ic.kmax, ic.amplitude, rng);
      if (minus) s.eta_minus = random_surface(g, ic.kmax, ic.amplitude, rng);
      break;
    }
    case InitialKind::Eigenmode: {
      Eigenmode e = linear_eigenmode(g, {ic.k1, ic.k2}, c.physical, c.mode == Mode::SurfaceTension, ic.amplitude,
                                     c.stability.seed);
      s.u = std::move(e.u);
      s.eta_plus = std::move(e.eta_plus);
      s.eta_minus = std::move(e.eta_minus);
      break;
    }
    case InitialKind::File:
      break;
  }
  s.p = lagged_pressure(s, c.physical, c.mode, make_extension(c), exec);
  return s;
}

}  // namespace siw
