// Command line front end: simulate, sweep, classify, locomote, validate.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "undulate/config.hpp"
#include "undulate/errors.hpp"
#include "undulate/harness.hpp"
#include "undulate/io.hpp"
#include "undulate/validation.hpp"

namespace fs = std::filesystem;
using namespace undulate;

namespace {

enum Exit { kOk = 0, kRunFailure = 1, kConfigError = 2 };

struct Common {
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

RunConfig load(const std::string& path, const Common& c) {
  RunConfig cfg = load_run_config(path);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_directory = c.out;
  return cfg;
}

int simulate(const std::string& path, const Common& c) {
  const RunConfig cfg = load(path, c);
  const RunArtifacts a = run_single(cfg, cfg.output_directory);
  std::printf("%s dL=%g mm dtau=%g mm -> %s  phase=%.1f deg  peak_ratio=%.3f  drops L/R=%zu/%zu  wave_index=%.2f\n",
              cfg.beam_id.c_str(), cfg.actuation.delta_L * 1e3, cfg.actuation.delta_tau * 1e3,
              to_string(a.report.label).c_str(), a.report.phase_shift_deg, a.report.peak_ratio,
              a.report.drop_events_left.size(), a.report.drop_events_right.size(),
              a.wave.traveling_wave_index);
  std::printf("wrote %s\nwrote %s\n", a.trace_path.c_str(), a.report_path.c_str());
  return kOk;
}

int sweep(const std::string& plan_path, const std::string& path, const Common& c) {
  const SweepPlan plan = load_sweep_plan(plan_path);
  const RunConfig cfg = load(path, c);
  const auto rows = run_sweep(plan, cfg, c.jobs, [](std::size_t done, std::size_t total) {
    std::fprintf(stderr, "\r%zu/%zu runs", done, total);
    if (done == total) std::fprintf(stderr, "\n");
  });
  fs::create_directories(cfg.output_directory);
  const std::string out = (fs::path(cfg.output_directory) / "summary.csv").string();
  write_text(out, summary_csv(rows, {config_hash(cfg), cfg.seed}));
  int failures = 0;
  for (const auto& r : rows) failures += r.failures;
  std::printf("%zu cells, %d failed runs\nwrote %s\n", rows.size(), failures, out.c_str());
  return failures ? kRunFailure : kOk;
}

int classify(const std::string& trace_path, const std::string& config_path, double period,
             const Common& c) {
  ClassifierThresholds th;
  LoadedTrace t = read_trace_csv(trace_path);
  if (!config_path.empty()) {
    const RunConfig cfg = load_run_config(config_path);
    th = cfg.thresholds;
    t.trace.profile = cfg.actuation;
    t.trace.beam_length = cfg.beam.length;
  } else {
    t.trace.profile.period = period;
  }
  const RegimeReport r = classify_regime(t.trace, th);
  const std::string json = report_json(r, t.provenance);
  if (c.out.empty()) {
    std::cout << json;
  } else {
    fs::create_directories(c.out);
    const std::string out = (fs::path(c.out) / "report.json").string();
    write_text(out, json);
    std::printf("%s -> %s\nwrote %s\n", trace_path.c_str(), to_string(r.label).c_str(), out.c_str());
  }
  return kOk;
}

int locomote(const std::string& path, const Common& c) {
  const RunConfig cfg = load(path, c);
  const LocomotionArtifacts a = run_locomotion(cfg, cfg.output_directory);
  const auto& r = a.run.result;
  std::printf("net displacement %.4g m (%.3g L), stride %.4g m/cycle, mean speed %.4g m/s, limit cycle error %.3g m\n",
              r.net_displacement, r.net_displacement / cfg.beam.length, r.stride_displacement,
              r.mean_speed, a.limit_cycle_err);
  std::printf("wrote %s\nwrote %s\n", a.trace_path.c_str(), a.result_path.c_str());
  return kOk;
}

int validate() {
  bool ok = true;
  for (const auto& o : run_validation()) {
    std::printf("%-15s %s  measured=%.6g  limit=%.3g  %s\n", o.name.c_str(), o.passed ? "PASS" : "FAIL",
                o.measured, o.limit, o.detail.c_str());
    ok = ok && o.passed;
  }
  return ok ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tendon-driven pre-compressed beam simulator"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool jobs) {
    sub->add_option("--out", common.out, "Output directory (overrides output.directory)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { common.seed = s; },
                                            "Seed for the symmetry-breaking perturbation");
    if (jobs)
      sub->add_option("--jobs", common.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  };

  std::string config, plan, trace, classify_config;
  double period = 2.0;

  auto* sim = app.add_subcommand("simulate", "Bench run of one configuration");
  sim->add_option("config", config, "Run config (YAML)")->required();
  add_common(sim, false);

  auto* sw = app.add_subcommand("sweep", "Regime map over a parameter grid");
  sw->add_option("plan", plan, "Sweep plan (YAML)")->required();
  sw->add_option("config", config, "Base run config (YAML)")->required();
  add_common(sw, true);

  auto* cl = app.add_subcommand("classify", "Classify a stored trace");
  cl->add_option("trace", trace, "Trace CSV")->required();
  cl->add_option("--config", classify_config, "Run config supplying period and thresholds");
  cl->add_option("--period", period, "Actuation period in s when no config is given")
      ->check(CLI::PositiveNumber);
  cl->add_option("--out", common.out, "Write report.json here instead of stdout");

  auto* lo = app.add_subcommand("locomote", "Free robot on anisotropic ground");
  lo->add_option("config", config, "Run config (YAML)")->required();
  add_common(lo, false);

  auto* va = app.add_subcommand("validate", "Solver oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return simulate(config, common);
    if (*sw) return sweep(plan, config, common);
    if (*cl) return classify(trace, classify_config, period, common);
    if (*lo) return locomote(config, common);
    if (*va) return validate();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return kRunFailure;
  }
  return kOk;
}
