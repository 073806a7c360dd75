// Command-line driver: single runs, batches, the background-window demo and
// the idealised Tau scaling experiment. Every subcommand writes plain CSV
// files, the effective configuration and a JSON manifest into --out.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ramsey/batch.hpp"
#include "ramsey/config.hpp"
#include "ramsey/likelihood_demo.hpp"
#include "ramsey/runner.hpp"
#include "ramsey/tau_scaling.hpp"
#include "ramsey/trace_io.hpp"

namespace fs = std::filesystem;
using namespace ramsey;

namespace {

enum Exit : int { ok = 0, usage = 2, config_error = 3, simulation_error = 4, io_error = 5 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> protocol;
  std::optional<std::string> unknowns;
  std::optional<std::string> workflow;
  std::optional<std::size_t> runs;
  bool snapshot = false;
  bool utility = false;
  std::int64_t repeats = 300;
  std::size_t epochs = 60;
};

std::uint64_t default_seed() {
  const char* env = std::getenv("RAMSEY_SEED");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const auto value = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("RAMSEY_SEED", 0, std::string("not an unsigned integer: '") + env + "'");
  }
}

Config load_config(const Options& o) {
  const auto seed = default_seed();
  Config config = o.config_path.empty() ? parse_config_text("", "defaults", seed)
                                        : parse_config_file(o.config_path, seed);
  auto& run = config.run;
  if (o.seed) run.seed = *o.seed;
  if (o.protocol) {
    const auto p = parse_protocol(*o.protocol);
    if (!p) throw ConfigError("--protocol", 0, "unknown protocol '" + *o.protocol + "'");
    run.protocol = *p;
  }
  if (o.unknowns) {
    const auto u = parse_unknowns(*o.unknowns);
    if (!u) throw ConfigError("--unknowns", 0, "unknown set of unknowns '" + *o.unknowns + "'");
    run.unknowns = *u;
  }
  if (o.workflow) {
    const auto w = parse_workflow(*o.workflow);
    if (!w) throw ConfigError("--workflow", 0, "unknown workflow '" + *o.workflow + "'");
    run.workflow = *w;
  }
  if (o.runs) config.batch_runs = *o.runs;
  try {
    run.validate(config.truth);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("command line", 0, e.what());
  }
  return config;
}

class Output {
 public:
  explicit Output(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
    files_.push_back(name);
  }

  void finish(nlohmann::ordered_json manifest, const Config& config) {
    write("config.effective.txt", [&](std::ostream& o) { o << to_config_text(config); });
    manifest["config"] = "config.effective.txt";
    manifest["files"] = files_;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

nlohmann::ordered_json base_manifest(const std::string& command, const Config& config) {
  nlohmann::ordered_json m;
  m["tool"] = "ramsey_sbed";
  m["subcommand"] = command;
  m["seed"] = config.run.seed;
  m["protocol"] = to_string(config.run.protocol);
  m["unknowns"] = to_string(config.run.unknowns);
  m["workflow"] = to_string(config.run.workflow);
  return m;
}

nlohmann::ordered_json summary_json(const PosteriorSummary& summary) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& p : summary.params) {
    j[std::string(to_string(p.param))] = {{"mean", p.mean},
                                          {"sigma", p.sigma},
                                          {"lower90", p.lower90},
                                          {"upper90", p.upper90}};
  }
  return j;
}

void cmd_run(const Options& o) {
  Config config = load_config(o);
  config.run.record_utility = o.utility;
  config.run.keep_final_cloud = o.snapshot;
  const RunTrace trace = run_single(config.run, config.truth);

  Output out(o.out_dir);
  out.write("trace.csv", [&](std::ostream& s) { write_trace_csv(s, std::span(&trace, 1)); });
  if (o.snapshot) out.write("cloud.csv", [&](std::ostream& s) { write_cloud_csv(s, *trace.final_cloud); });
  if (o.utility) out.write("utility.csv", [&](std::ostream& s) { write_utility_csv(s, trace, config.run.grid); });

  auto m = base_manifest("run", config);
  m["epochs"] = trace.epochs.size();
  m["final"] = summary_json(trace.final_summary);
  const auto snr = snr_time(config.truth, Setting{10'000});
  m["snr_at_10us"] = {{"photons", snr.photons},
                      {"sequences", snr.sequences},
                      {"duration_s", std::chrono::duration<double>(snr.duration).count()}};
  out.finish(m, config);
}

void cmd_batch(const Options& o) {
  const Config config = load_config(o);
  BatchOptions options;
  options.points_per_decade = config.points_per_decade;
  const BatchSummary summary = run_batch(config.run, config.truth, config.batch_runs, options);

  Output out(o.out_dir);
  out.write("traces.csv", [&](std::ostream& s) { write_trace_csv(s, summary.traces); });
  out.write("batch.csv", [&](std::ostream& s) { write_batch_csv(s, summary); });

  auto m = base_manifest("batch", config);
  m["runs"] = summary.runs;
  m["band_violations"] = summary.band_violations;
  out.finish(m, config);
}

void cmd_likelihood_demo(const Options& o) {
  const Config config = load_config(o);
  const auto curves = likelihood_curves();
  WindowSweepOptions sweep_options;
  sweep_options.runs = config.batch_runs;
  const auto sweep = window_sweep(config.run, config.truth, sweep_options);

  Output out(o.out_dir);
  out.write("likelihood_curves.csv", [&](std::ostream& s) {
    s << "ratio,R,likelihood\n";
    for (const auto& c : curves)
      for (std::size_t i = 0; i < c.r.size(); ++i)
        s << format_number(c.ratio) << ',' << format_number(c.r[i]) << ',' << format_number(c.likelihood[i])
          << '\n';
  });
  out.write("likelihood_peaks.csv", [&](std::ostream& s) {
    s << "ratio,peak_R,fwhm\n";
    for (const auto& c : curves)
      s << format_number(c.ratio) << ',' << format_number(c.peak_r) << ',' << format_number(c.fwhm) << '\n';
  });
  out.write("window_sweep.csv", [&](std::ostream& s) {
    s << "window,mean_ratio,mean_final_sigma\n";
    for (const auto& p : sweep)
      s << p.window << ',' << format_number(p.mean_ratio) << ',' << format_number(p.mean_final_sigma) << '\n';
  });
  auto m = base_manifest("likelihood-demo", config);
  m["runs_per_window"] = sweep_options.runs;
  out.finish(m, config);
}

void cmd_tau_scaling(const Options& o) {
  Config config = load_config(o);
  config.run.protocol = Protocol::tau;
  TauScalingOptions options;
  options.repeats_per_epoch = o.repeats;
  options.epochs = o.epochs;
  options.runs = config.batch_runs;
  const auto report = tau_scaling_experiment(config.truth, config.run, options);

  Output out(o.out_dir);
  out.write("tau_scaling.csv", [&](std::ostream& s) {
    s << "epoch,mean_tau_us,mean_sigma_before,mean_sigma_after,mean_total_time_us,mean_phase_uncertainty,"
         "in_range_fraction\n";
    for (const auto& e : report.epochs)
      s << e.epoch << ',' << format_number(e.mean_tau_us) << ',' << format_number(e.mean_sigma_before) << ','
        << format_number(e.mean_sigma_after) << ',' << format_number(e.mean_total_time_us) << ','
        << format_number(e.mean_phase_uncertainty) << ',' << format_number(e.in_range_fraction) << '\n';
  });
  auto m = base_manifest("tau-scaling", config);
  m["runs"] = options.runs;
  m["repeats_per_epoch"] = options.repeats_per_epoch;
  m["fit"] = {{"epochs", report.fit_epochs},
              {"beta", report.beta},
              {"slope", report.slope},
              {"slope_stderr", report.slope_stderr},
              {"slope_ci95", {report.slope_ci_low, report.slope_ci_high}},
              {"heisenberg_reference", -1.0}};
  out.finish(m, config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ramsey frequency estimation with sequential Bayesian experiment design"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "configuration file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out_dir, "output directory, created if absent");
    sub->add_option("--seed", o.seed, "seed override (default: config, then RAMSEY_SEED, then 1)");
    sub->add_option("--protocol", o.protocol, "bayes | tau | random");
    sub->add_option("--unknowns", o.unknowns, "omega | all");
    sub->add_option("--workflow", o.workflow, "series | concurrent | concurrent-deterministic");
  };

  auto* run = app.add_subcommand("run", "one run; writes trace.csv");
  common(run);
  run->add_flag("--snapshot", o.snapshot, "also write the final particle cloud");
  run->add_flag("--utility", o.utility, "also write the per-epoch utility map (bayes)");

  auto* batch = app.add_subcommand("batch", "independent runs; writes traces.csv and batch.csv");
  common(batch);
  batch->add_option("--runs", o.runs, "number of runs")->check(CLI::PositiveNumber);

  auto* demo = app.add_subcommand("likelihood-demo", "background-window likelihood curves and window sweep");
  common(demo);
  demo->add_option("--runs", o.runs, "runs per window")->check(CLI::PositiveNumber);

  auto* scaling = app.add_subcommand("tau-scaling", "zero-overhead Tau runs with fixed repeats per epoch");
  common(scaling);
  scaling->add_option("--runs", o.runs, "number of runs")->check(CLI::PositiveNumber);
  scaling->add_option("--repeats", o.repeats, "sequences per epoch")->check(CLI::PositiveNumber);
  scaling->add_option("--epochs", o.epochs, "epochs per run")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*run) cmd_run(o);
    else if (*batch) cmd_batch(o);
    else if (*demo) cmd_likelihood_demo(o);
    else cmd_tau_scaling(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return Exit::config_error;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return Exit::io_error;
  } catch (const std::exception& e) {
    std::cerr << "simulation error: " << e.what() << '\n';
    return Exit::simulation_error;
  }
  return Exit::ok;
}
