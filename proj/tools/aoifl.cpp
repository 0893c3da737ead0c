// Command-line front end: run one simulation, sweep V or rho, or validate a
// config file.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aoifl/aoifl.hpp"

namespace fs = std::filesystem;
using namespace aoifl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return os;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, bool trace_ccp) {
  const auto cfg = config::load_file(config_path);
  fs::create_directories(out_dir);

  engine::RunOptions opt;
  std::ofstream trace;
  if (trace_ccp) {
    trace = open_out(out_dir / "ccp_trace.csv");
    trace << csv::kTraceHeader << '\n';
    opt.solve_trace = [&trace](int sensor, std::uint64_t idx, int iter, double p, double obj) {
      csv::Row(trace) << sensor << static_cast<unsigned long long>(idx) << iter << p << obj;
    };
  }
  const auto res = engine::run(cfg, opt);

  {
    auto os = open_out(out_dir / "records.csv");
    csv::write_records(os, res.records);
  }
  {
    auto os = open_out(out_dir / "rounds.csv");
    csv::write_rounds(os, res.rounds);
  }
  {
    auto os = open_out(out_dir / "summary.csv");
    const metrics::MetricsSummary rows[] = {res.summary};
    csv::write_summary(os, rows);
  }
  {
    auto os = open_out(out_dir / "ccdf.csv");
    csv::write_ccdf(os, res.summary);
  }

  const auto& s = res.summary;
  std::printf("scheme %s  V %g  rho %g  seed %llu\n", s.scheme.c_str(), s.V, s.rho,
              static_cast<unsigned long long>(s.seed));
  std::printf("  uploads (post burn-in)  %llu\n", static_cast<unsigned long long>(s.n_records));
  std::printf("  entropic objective      %.6e J\n", s.entropic_objective);
  std::printf("  mean E_k / E_sys        %.6e / %.6e J\n", s.mean_E_k, s.mean_E_sys);
  std::printf("  exceedance frequency    %.4f\n", s.exceedance_frequency);
  std::printf("  mean staleness          %.6e (f0 %.3e)\n", s.mean_staleness, cfg.staleness.f0);
  if (s.esms) std::printf("  ESMS                    %.4e\n", *s.esms);
  if (!s.queues_stable) std::printf("  warning: staleness queue growing (Gamma/I >= f0)\n");
  std::printf("  wrote %s\n", out_dir.string().c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& var,
              const std::vector<double>& values, const std::vector<std::string>& schemes,
              const std::vector<std::uint64_t>& seeds, const fs::path& out_dir, unsigned threads) {
  const auto base = config::load_file(config_path);
  sweep::SweepSpec spec;
  try {
    spec.variable = sweep::parse_variable(var);
    spec.values = values;
    for (const auto& s : schemes) spec.schemes.push_back(federation::parse_scheme(s));
    spec.seeds = seeds;
    spec.validate();
    for (double v : values) sweep::cell_config(base, spec.variable, v, spec.schemes[0], 1).validate();
  } catch (const std::invalid_argument& e) {
    throw config::ConfigError(e.what());
  }

  const auto res = sweep::run_sweep(spec, base, threads);
  fs::create_directories(out_dir);
  {
    auto os = open_out(out_dir / "sweep.csv");
    sweep::write_sweep_csv(os, spec, res);
  }
  {
    auto os = open_out(out_dir / "sweep_long.csv");
    sweep::write_long_csv(os, spec, res);
  }
  {
    auto os = open_out(out_dir / "sweep_runs.csv");
    sweep::write_runs_csv(os, res);
  }
  std::size_t failed = 0;
  for (const auto& r : res.runs) failed += r.summary ? 0 : 1;
  if (failed > 0) {
    auto os = open_out(out_dir / "sweep_errors.csv");
    sweep::write_errors_csv(os, spec, res);
  }

  std::printf("%-6s %-10s %-8s %-24s %-24s\n", var.c_str(), "value", "scheme", "objective (mean/std)",
              "E_sys (mean/std)");
  for (const auto& c : res.cells)
    std::printf("%-6s %-10g %-8s %.4e/%.2e      %.4e/%.2e\n", var.c_str(), c.value,
                std::string(federation::to_string(c.scheme)).c_str(), c.objective.mean,
                c.objective.std, c.mean_E_sys.mean, c.mean_E_sys.std);
  std::printf("%zu runs, %zu failed, wrote %s\n", res.runs.size(), failed, out_dir.string().c_str());
  return failed == res.runs.size() ? kExitRuntime : 0;
}

int cmd_validate(const std::string& config_path) {
  const auto cfg = config::load_file(config_path);
  const auto& ch = cfg.channel;
  const double g = ch.pathloss_gain();
  const double snr = g * ch.p_max_w / ch.noise_power_w();
  const double rate = ch.bandwidth_hz * phy::spectral_efficiency(ch.p_max_w, g, ch);
  const double t = phy::transmission_time(ch.p_max_w, g, ch);
  const double a0 = aoi::aoi_for_staleness(cfg.staleness.f0, cfg.staleness);

  std::printf("config OK: %s\n", config_path.c_str());
  std::printf("  scheme %s, K %d, horizon %g s, %g Hz sampling, V %g, rho %g, seed %llu\n",
              std::string(federation::to_string(cfg.scheme)).c_str(), cfg.n_sensors, cfg.horizon_s,
              cfg.sampling_rate_hz, cfg.V, cfg.rho, static_cast<unsigned long long>(cfg.seed));
  std::printf("  path loss               %.4f dB (gain %.6e)\n", ch.pathloss_db, g);
  std::printf("  noise power N0*B        %.6e W (%.2f dBm)\n", ch.noise_power_w(),
              phy::watts_to_dbm(ch.noise_power_w()));
  std::printf("  p_max                   %.6e W (%.2f dBm)\n", ch.p_max_w, phy::watts_to_dbm(ch.p_max_w));
  std::printf("  mean SNR at p_max       %.4f dB\n", phy::linear_to_db(snr));
  std::printf("  max rate (unit fading)  %.6e bit/s\n", rate);
  std::printf("  upload time at p_max    %.6e s\n", t);
  std::printf("  upload energy at p_max  %.6e J\n", ch.p_max_w * t);
  std::printf("  load at p_max           %.4f\n", cfg.sampling_rate_hz * t);
  std::printf("  staleness threshold f0  %.4e  (AoI %.6e s)\n", cfg.staleness.f0, a0);
  std::printf("  training windows / interval  %d\n", cfg.schedule.windows_per_interval());
  std::printf("  model upload energy     %.6e J\n",
              phy::model_upload_energy(g, ch, cfg.training_energy));
  std::printf("  compute energy / sample sensor %.6e J, controller %.6e J\n",
              phy::training_compute_energy(1, cfg.training_energy, false),
              phy::training_compute_energy(1, cfg.training_energy, true));
  if (cfg.sampling_rate_hz * t >= 1.0) {
    std::printf("  error: the sampling rate exceeds the full-power upload rate\n");
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-aware power allocation with federated extreme-AoI modeling"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool trace_ccp = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  run->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_flag("--trace-ccp", trace_ccp, "write every CCP iterate to ccp_trace.csv");

  std::string var;
  std::vector<double> values;
  std::vector<std::string> schemes{"FL", "CENT", "LOCAL", "NonT", "ESA"};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  unsigned threads = 0;
  auto* sw = app.add_subcommand("sweep", "sweep V or rho across schemes and seeds");
  sw->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
  sw->add_option("--var", var, "swept variable")->required()->check(CLI::IsMember({"V", "rho"}));
  sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
  sw->add_option("--schemes", schemes, "comma-separated schemes")->delimiter(',')->capture_default_str();
  sw->add_option("--seeds", seeds, "comma-separated seeds")->delimiter(',')->capture_default_str();
  sw->add_option("--out", out_dir, "output directory")->capture_default_str();
  sw->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();

  auto* val = app.add_subcommand("validate", "check a config and print derived constants");
  val->add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, trace_ccp);
    if (sw->parsed()) return cmd_sweep(config_path, var, values, schemes, seeds, out_dir, threads);
    if (val->parsed()) return cmd_validate(config_path);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
