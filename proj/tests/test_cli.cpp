// Drives the siwave executable end to end, plus the config layer it sits on.

#include <doctest.h>

#include "siw/config.hpp"
#include "siw/output.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using namespace siw;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("siwave_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome siwave(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch() / ("stdout_" + std::to_string(counter));
  const fs::path err = scratch() / ("stderr_" + std::to_string(counter++));
  const std::string cmd = std::string(SIWAVE_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

// small stable two-layer case, 10 steps
const char* kSmall = R"(
[physical]
rho_plus = 1
rho_minus = 2
mu_plus = 1
mu_minus = 1
g = 1
sigma_plus = 1
sigma_minus = 1

[grid]
N1 = 6
N2 = 6
nz_plus = 10
nz_minus = 10

[run]
dt = 0.01
t_end = 0.1
mode = surface_tension
snapshot_every = 5

[initial]
kind = single_mode
amplitude = 0.001
k1 = 1
k2 = 0
surface = both
)";

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::vector<std::string> data_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream is(csv);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(line);
  }
  return rows;
}

std::vector<double> column(const std::string& csv, const std::string& name) {
  std::istringstream is(csv);
  std::string line;
  int idx = -1;
  std::vector<double> out;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (idx < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] == name) idx = int(i);
      REQUIRE(idx >= 0);
      continue;
    }
    out.push_back(std::stod(cells[idx]));
  }
  return out;
}

}  // namespace

TEST_CASE("invalid grid size is rejected with the offending field") {
  std::string text = kSmall;
  text.replace(text.find("N1 = 6"), 6, "N1 = 3");
  const fs::path cfg = write_config("bad_grid.ini", text);
  const Outcome o = siwave("simulate --config " + cfg.string() + " --out " + (scratch() / "runs").string());
  CHECK(o.code == 1);
  CHECK(o.err.find("grid.N1") != std::string::npos);
}

TEST_CASE("simulate writes a decaying energy history and reruns identically") {
  const fs::path cfg = write_config("small.ini", kSmall);
  const std::string out = (scratch() / "runs").string();
  const Outcome a = siwave("simulate --config " + cfg.string() + " --out " + out);
  REQUIRE(a.code == 0);
  const fs::path dir = first_line(a.out);
  REQUIRE(fs::exists(dir / "energy.csv"));
  CHECK(fs::exists(dir / "config.ini"));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "snapshots" / "snapshot_00000005.siw"));
  CHECK(fs::exists(dir / "snapshots" / "snapshot_00000010.siw"));
  const std::string csv = slurp(dir / "energy.csv");
  CHECK(data_rows(csv).size() == 11);
  const std::vector<double> B = column(csv, "base_energy_st");
  for (std::size_t i = 1; i < B.size(); ++i) CHECK(B[i] < B[i - 1]);
  CHECK(slurp(dir / "summary.txt").find("status = completed") != std::string::npos);

  const Outcome b = siwave("simulate --config " + cfg.string() + " --out " + out);
  REQUIRE(b.code == 0);
  const fs::path dir2 = first_line(b.out);
  CHECK(dir2 != dir);
  CHECK(slurp(dir2 / "energy.csv") == csv);

  SUBCASE("the header carries the configuration") {
    std::ifstream in(dir / "energy.csv");
    const Config back = config_from_header(in);
    CHECK(canonical_text(back) == canonical_text(load_config(cfg)));
    CHECK(config_hash(back) == config_hash(load_config(cfg)));
  }

  SUBCASE("restart from the midpoint reproduces the tail bit for bit") {
    const Outcome r = siwave("simulate --config " + cfg.string() + " --out " + out + " --restart " +
                             (dir / "snapshots" / "snapshot_00000005.siw").string());
    REQUIRE(r.code == 0);
    const std::vector<std::string> full = data_rows(csv), tail = data_rows(slurp(fs::path(first_line(r.out)) / "energy.csv"));
    REQUIRE(tail.size() == 5);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(tail[i] == full[6 + i]);
    CHECK(slurp(fs::path(first_line(r.out)) / "snapshots" / "snapshot_00000010.siw") ==
          slurp(dir / "snapshots" / "snapshot_00000010.siw"));
  }

  SUBCASE("restart under a different configuration is refused") {
    std::string text = kSmall;
    text.replace(text.find("mu_minus = 1"), 12, "mu_minus = 2");
    const fs::path other = write_config("other.ini", text);
    const Outcome r = siwave("simulate --config " + other.string() + " --out " + out + " --restart " +
                             (dir / "snapshots" / "snapshot_00000005.siw").string());
    CHECK(r.code == 1);
    CHECK(r.err.find("config") != std::string::npos);
  }

  SUBCASE("export lists every field block") {
    const Outcome e = siwave("export " + (dir / "snapshots" / "snapshot_00000010.siw").string());
    REQUIRE(e.code == 0);
    for (const char* f : {"u1", "u2", "u3", "p", "eta_plus", "eta_minus"}) CHECK(e.out.find(f) != std::string::npos);
  }
}

TEST_CASE("thread count does not change the output") {
  const fs::path cfg = write_config("threads.ini", kSmall);
  const std::string out = (scratch() / "threads").string();
  const Outcome a = siwave("simulate --threads 1 --config " + cfg.string() + " --out " + out);
  const Outcome b = siwave("simulate --threads 3 --config " + cfg.string() + " --out " + out);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(fs::path(first_line(a.out)) / "energy.csv") == slurp(fs::path(first_line(b.out)) / "energy.csv"));
}

TEST_CASE("stability subcommand") {
  const std::string out = (scratch() / "stab").string();
  SUBCASE("rates with the dense oracle") {
    const fs::path cfg = write_config("rt.ini", R"(
[physical]
rho_plus = 2
rho_minus = 1
sigma_plus = 1
sigma_minus = 0.5
[stability]
nz = 12
kmax = 1
sigma = 0.5, 1.5
sigma_lo = 0.25
sigma_hi = 2
)");
    const Outcome o = siwave("stability --oracle --config " + cfg.string() + " --out " + out);
    REQUIRE(o.code == 0);
    const fs::path dir = first_line(o.out);
    const std::string csv = slurp(dir / "rates.csv");
    for (const char* c : {"sigma_minus", "k1", "k2", "rate_power", "rate_dense", "rel_diff"})
      CHECK(csv.find(c) != std::string::npos);
    CHECK(data_rows(csv).size() == 4);
    CHECK(o.out.find("crossing") != std::string::npos);
    const std::string summary = slurp(dir / "threshold.txt");
    CHECK(summary.find("bracketed") != std::string::npos);
  }
  SUBCASE("stable stratification has no threshold") {
    const fs::path cfg = write_config("stable.ini", R"(
[physical]
rho_plus = 1
rho_minus = 2
sigma_plus = 1
sigma_minus = 1
[stability]
nz = 10
kmax = 1
)");
    const Outcome o = siwave("stability --config " + cfg.string() + " --out " + out);
    REQUIRE(o.code == 0);
    CHECK(o.out.find("threshold inactive") != std::string::npos);
    CHECK(slurp(fs::path(first_line(o.out)) / "threshold.txt").find("inactive") != std::string::npos);
  }
}

TEST_CASE("selftest and usage errors") {
  const Outcome s = siwave("selftest");
  CHECK(s.code == 0);
  CHECK(s.out.find("stokes_manufactured") != std::string::npos);
  CHECK(s.out.find("FAIL") == std::string::npos);
  CHECK(siwave("").code == 1);
  CHECK(siwave("simulate").code == 1);
  CHECK(siwave("simulate --config /nonexistent/x.ini").code == 1);
}

TEST_CASE("config parsing") {
  SUBCASE("defaults and comments") {
    std::istringstream in("# comment\n[grid]\nN1 = 8 ; trailing\n");
    const Config c = parse_config(in);
    CHECK(c.N1 == 8);
    CHECK(c.N2 == 16);
  }
  SUBCASE("unknown keys and bad values are all reported") {
    std::istringstream in("[grid]\nN1 = eight\nNX = 4\n[run]\ndt = 0.003\nt_end = 0.01\nscheme = bdf2\n");
    try {
      parse_config(in);
      FAIL("no error");
    } catch (const ConfigError& e) {
      const std::string w = e.what();
      CHECK(w.find("grid.N1") != std::string::npos);
      CHECK(w.find("grid.NX") != std::string::npos);
      CHECK(w.find("run.t_end") != std::string::npos);
      CHECK(w.find("run.scheme") != std::string::npos);
    }
  }
  SUBCASE("surface tension mode needs positive coefficients") {
    std::istringstream in("[physical]\nsigma_minus = 0\n[run]\nmode = surface_tension\n");
    CHECK_THROWS_AS(parse_config(in), ConfigError);
  }
  SUBCASE("canonical text parses back to the same hash, threads excluded") {
    std::istringstream in(kSmall);
    Config c = parse_config(in);
    std::istringstream again(canonical_text(c));
    CHECK(config_hash(parse_config(again)) == config_hash(c));
    const std::string h = config_hash(c);
    c.threads = 7;
    CHECK(config_hash(c) == h);
    c.dt = 0.02;
    CHECK(config_hash(c) != h);
  }
}
