// siwave: batch driver for the two-layer viscous wave solver.
//
//   siwave simulate  --config run.ini [--out runs] [--threads N] [--restart snap.siw]
//   siwave stability --config run.ini [--out runs] [--oracle] [--sigma 0.5,1.5] [--sigma-lo a --sigma-hi b]
//   siwave selftest  [--threads N]
//   siwave export    snap.siw [--output file.txt]
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 failed check.

#include "siw/config.hpp"
#include "siw/output.hpp"
#include "siw/parallel.hpp"
#include "siw/selftest.hpp"
#include "siw/stability.hpp"
#include "siw/timestepper.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace siw;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kRuntime = 2, kCheckFailed = 3 };

struct Common {
  std::string config;
  std::string out = "runs";
  int threads = -1;  // -1: take the config value
};

void apply_threads(const Common& c, const Config& cfg) {
  const int n = c.threads >= 0 ? c.threads : cfg.threads;
  if (n > 0) set_threads(n);
}

void write_kv(std::ostream& os, const std::string& k, const std::string& v) { os << k << " = " << v << '\n'; }

int cmd_simulate(const Common& c, const std::string& restart) {
  const Config cfg = load_config(c.config);
  apply_threads(c, cfg);
  const GridPtr g = make_grid(cfg);
  const RunOptions opts = make_run_options(cfg);

  State s;
  bool resumed = false;
  if (!restart.empty()) {
    Snapshot snap = read_snapshot(restart, g);
    if (snap.config_hash != config_hash(cfg))
      throw InvalidArgument("snapshot '" + restart + "' was written by config " + snap.config_hash.substr(0, 16) +
                            ", not by " + config_hash(cfg).substr(0, 16));
    s = std::move(snap.state);
    resumed = true;
  } else {
    s = make_initial_state(cfg, g);
  }

  const fs::path dir = make_run_dir(c.out, cfg);
  {
    std::ofstream ini(dir / "config.ini");
    ini << canonical_text(cfg);
  }
  std::ofstream summary(dir / "summary.txt");
  write_header(summary, cfg, "summary");
  if (resumed) write_kv(summary, "restart", restart);

  if (!resumed) {
    const CompatibilityReport cr = check_compatibility(s.u, s.p, s.eta_plus, s.eta_minus, cfg.physical, cfg.mode,
                                                       opts.nonlinear.spec, cfg.compatibility);
    write_kv(summary, "compatibility_top", format_double(cr.top));
    write_kv(summary, "compatibility_interface", format_double(cr.interface));
    if (!cr.pass)
      std::cerr << "warning: initial data violate the tangential stress compatibility condition by "
                << std::max(cr.top, cr.interface) << " (threshold " << cfg.compatibility << ")\n";
  }

  fs::create_directories(dir / "snapshots");
  EnergyCsv csv(dir / "energy.csv", cfg);
  RunObserver obs;
  obs.on_report = [&](const State&, const EnergyReport& r) { csv.write(r); };
  obs.on_snapshot = [&](const State& st) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(8) << std::setfill('0') << st.step << ".siw";
    write_snapshot(dir / "snapshots" / name.str(), st, cfg);
  };
  RunOptions ro = opts;
  ro.report_initial = !resumed;
  const RunResult res = run(std::move(s), ro, cfg.physical, obs);

  write_kv(summary, "status", res.aborted ? "aborted" : "completed");
  if (res.aborted) write_kv(summary, "abort_reason", res.abort_reason);
  write_kv(summary, "final_step", std::to_string(res.final.step));
  write_kv(summary, "final_t", format_double(res.final.t));
  if (!res.reports.empty()) write_kv(summary, "final_E", format_double(res.reports.back().E));
  std::cout << dir.string() << '\n';
  if (res.aborted) {
    std::cerr << "run aborted: " << res.abort_reason << '\n';
    return kRuntime;
  }
  return kOk;
}

int cmd_stability(const Common& c, bool oracle, std::vector<double> sigma, std::optional<double> lo,
                  std::optional<double> hi) {
  Config cfg = load_config(c.config);
  if (!sigma.empty()) cfg.stability.sigma = sigma;
  if (lo) cfg.stability.sigma_lo = *lo;
  if (hi) cfg.stability.sigma_hi = *hi;
  if (auto v = config_violations(cfg); !v.empty()) throw ConfigError(v);
  apply_threads(c, cfg);

  const RateOptions o = make_rate_options(cfg);
  const auto modes = mode_set(cfg.stability.kmax);
  const RateMethod primary = cfg.stability.method;
  const RateMethod other = primary == RateMethod::Power ? RateMethod::Dense : RateMethod::Power;
  std::vector<double> sigmas = cfg.stability.sigma;
  if (sigmas.empty()) sigmas.push_back(cfg.physical.sigma_minus);

  std::vector<RateRow> rows;
  double worst = 0.0;
  for (double sm : sigmas) {
    FluidParams p = cfg.physical;
    p.sigma_minus = sm;
    const StabilityReport a = stability_report(p, modes, primary, o);
    std::optional<StabilityReport> b;
    if (oracle) b = stability_report(p, modes, other, o);
    for (std::size_t i = 0; i < a.rates.size(); ++i) {
      RateRow r;
      r.sigma_minus = sm;
      r.n = a.rates[i].n;
      // the power column always holds the power-method rate
      r.power = primary == RateMethod::Power ? a.rates[i].lambda : b ? b->rates[i].lambda : a.rates[i].lambda;
      if (b) {
        r.has_dense = true;
        r.dense = primary == RateMethod::Dense ? a.rates[i].lambda : b->rates[i].lambda;
        worst = std::max(worst, std::abs(r.power - r.dense) / std::max(std::abs(r.dense), 1e-12));
      }
      rows.push_back(r);
    }
  }

  const ThresholdScan scan = rt_threshold_scan(cfg.physical, cfg.stability.sigma_lo, cfg.stability.sigma_hi, modes,
                                               primary, o, cfg.stability.rel_tol);
  const fs::path dir = make_run_dir(c.out, cfg);
  write_rates_csv(dir / "rates.csv", cfg, rows);
  write_threshold_summary(dir / "threshold.txt", cfg, scan);

  std::cout << dir.string() << '\n';
  if (scan.inactive)
    std::cout << "threshold inactive: density jump <= 0\n";
  else if (scan.bracketed)
    std::cout << "crossing " << format_double(scan.crossing) << " vs sigma_c " << format_double(scan.sigma_c)
              << '\n';
  else
    std::cout << "no sign change of the maximal rate on [" << format_double(cfg.stability.sigma_lo) << ", "
              << format_double(cfg.stability.sigma_hi) << "]\n";
  if (oracle) {
    std::cout << "largest power/dense relative difference " << worst << '\n';
    if (worst > 1e-6) {
      std::cerr << "power and dense rates disagree beyond 1e-6\n";
      return kCheckFailed;
    }
  }
  return kOk;
}

int cmd_selftest(int threads) {
  if (threads > 0) set_threads(threads);
  const auto cases = run_selftest();
  print_selftest(std::cout, cases);
  return all_pass(cases) ? kOk : kCheckFailed;
}

int cmd_export(const std::string& snapshot, const std::string& output) {
  if (output.empty()) {
    export_snapshot_text(snapshot, std::cout);
    return kOk;
  }
  std::ofstream os(output);
  if (!os) throw std::runtime_error("cannot open '" + output + "' for writing");
  export_snapshot_text(snapshot, os);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-layer viscous surface-internal wave solver"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);

  Common sim, stab;
  std::string restart;
  auto* simulate = app.add_subcommand("simulate", "time integration; writes energy.csv and snapshots");
  simulate->add_option("--config", sim.config, "config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out, "parent directory of the run directory");
  simulate->add_option("--threads", sim.threads, "worker threads (overrides run.threads)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--restart", restart, "continue from a snapshot of the same config")->check(CLI::ExistingFile);

  bool oracle = false;
  std::vector<double> sigma;
  std::optional<double> sigma_lo, sigma_hi;
  auto* stability = app.add_subcommand("stability", "linear growth rates and the threshold scan");
  stability->add_option("--config", stab.config, "config file")->required()->check(CLI::ExistingFile);
  stability->add_option("--out", stab.out, "parent directory of the run directory");
  stability->add_option("--threads", stab.threads, "worker threads")->check(CLI::NonNegativeNumber);
  stability->add_flag("--oracle", oracle, "also evaluate the dense eigenproblem and compare");
  stability->add_option("--sigma", sigma, "sigma_- values of the rate table")->delimiter(',');
  stability->add_option("--sigma-lo", sigma_lo, "lower end of the threshold bracket");
  stability->add_option("--sigma-hi", sigma_hi, "upper end of the threshold bracket");

  int st_threads = 0;
  auto* selftest = app.add_subcommand("selftest", "fast in-memory checks");
  selftest->add_option("--threads", st_threads, "worker threads")->check(CLI::NonNegativeNumber);

  std::string snapshot, output;
  auto* exporter = app.add_subcommand("export", "plain-text dump of a snapshot");
  exporter->add_option("snapshot", snapshot, "snapshot file")->required()->check(CLI::ExistingFile);
  exporter->add_option("--output", output, "write here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*simulate) return cmd_simulate(sim, restart);
    if (*stability) return cmd_stability(stab, oracle, sigma, sigma_lo, sigma_hi);
    if (*selftest) return cmd_selftest(st_threads);
    if (*exporter) return cmd_export(snapshot, output);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return kInvalid;
}
