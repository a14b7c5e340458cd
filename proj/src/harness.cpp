#include "undulate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "undulate/errors.hpp"

namespace undulate {

namespace fs = std::filesystem;

Setup make_setup(const RunConfig& config) {
  config.validate();
  Setup s{discretize(config.beam, config.n_segments), {}, {}, {}};
  s.tendons = make_tendons(s.beam, config.tendon_stiffness);
  s.bench = clamped_at_a(s.beam, config.global_viscous_damping);
  s.options.sample_rate = config.sample_rate;
  s.options.seed = config.seed;
  s.options.dt_factor = config.dt_factor;
  return s;
}

namespace {

std::string prepare_dir(const std::string& dir) {
  if (dir.empty()) return dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError(dir + ": cannot create output directory: " + ec.message());
  return dir;
}

}  // namespace

RunArtifacts run_single(const RunConfig& config, const std::string& out_dir) {
  const Setup s = make_setup(config);
  RunArtifacts a;
  a.provenance = {config_hash(config), config.seed};
  a.trace = run_actuated(s.beam, s.bench, s.tendons, config.actuation, s.options);
  a.trace.beam_id = config.beam_id;
  a.report = classify_regime(a.trace, config.thresholds);
  a.wave = wave_metrics(a.trace, s.beam.length, config.thresholds.skip_cycles);
  if (!prepare_dir(out_dir).empty()) {
    a.trace_path = (fs::path(out_dir) / "trace.csv").string();
    a.report_path = (fs::path(out_dir) / "report.json").string();
    write_trace_csv(a.trace_path, a.trace, a.provenance);
    write_text(a.report_path, report_json(a.report, a.provenance));
  }
  return a;
}

LocomotionArtifacts run_locomotion(const RunConfig& config, const std::string& out_dir) {
  const Setup s = make_setup(config);
  LocomotionArtifacts a;
  a.provenance = {config_hash(config), config.seed};
  const double duration = config.actuation.n_cycles * config.actuation.period;
  a.run = simulate_locomotion(s.beam, s.tendons, config.actuation, config.ground, duration, s.options);
  a.run.trace.beam_id = config.beam_id;
  a.limit_cycle_err = limit_cycle_error(a.run.result, 3);
  if (!prepare_dir(out_dir).empty()) {
    a.trace_path = (fs::path(out_dir) / "locomotion_trace.csv").string();
    a.result_path = (fs::path(out_dir) / "locomotion.json").string();
    write_trace_csv(a.trace_path, a.run.trace, a.provenance);
    write_text(a.result_path, locomotion_json(a.run.result, a.limit_cycle_err, a.provenance));
  }
  return a;
}

namespace {

struct Cell {
  std::string beam;
  double dl = 0, dt = 0;
};

struct Outcome {
  bool ok = false;
  Regime label = Regime::TypeI;
  double phase = 0, ratio = 0, drops = 0;
  std::string error;
};

Outcome run_one(const RunConfig& base, const Cell& cell, int rep) {
  Outcome o;
  try {
    RunConfig c = base;
    c.beam = beam_preset(cell.beam);
    c.beam.rayleigh_mass = base.beam.rayleigh_mass;
    c.beam.rayleigh_stiffness = base.beam.rayleigh_stiffness;
    c.beam.youngs_modulus = base.beam.youngs_modulus;
    c.beam.density = base.beam.density;
    c.beam_id = cell.beam;
    c.actuation.delta_L = cell.dl * 1e-3;
    c.actuation.delta_tau = cell.dt * 1e-3;
    c.seed = base.seed + static_cast<std::uint64_t>(rep);
    const RunArtifacts a = run_single(c, "");
    const double per = c.actuation.period * c.sample_rate;
    const double skip = static_cast<double>(a.trace.size()) / per - c.thresholds.skip_cycles >=
                                c.thresholds.min_cycles
                            ? c.thresholds.skip_cycles
                            : 0.0;
    const double cycles = static_cast<double>(a.trace.size()) / per - skip;
    o.ok = true;
    o.label = a.report.label;
    o.phase = a.report.phase_shift_deg;
    o.ratio = a.report.peak_ratio;
    o.drops = 0.5 * static_cast<double>(a.report.drop_events_left.size() +
                                        a.report.drop_events_right.size()) / cycles;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepPlan& plan, const RunConfig& base, int jobs,
                                const SweepProgress& progress) {
  plan.validate();
  base.validate();
  std::vector<Cell> cells;
  for (const auto& b : plan.beams)
    for (double dl : plan.delta_L_list)
      for (double dt : plan.delta_tau_list) cells.push_back({b, dl, dt});
  std::sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) {
    return std::tie(x.beam, x.dl, x.dt) < std::tie(y.beam, y.dl, y.dt);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const Cell& x, const Cell& y) {
                            return x.beam == y.beam && x.dl == y.dl && x.dt == y.dt;
                          }),
              cells.end());

  const std::size_t reps = static_cast<std::size_t>(plan.repetitions);
  const std::size_t total = cells.size() * reps;
  std::vector<Outcome> outcomes(total);
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      outcomes[i] = run_one(base, cells[i / reps], static_cast<int>(i % reps));
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row;
    row.beam_id = cells[c].beam;
    row.delta_L_mm = cells[c].dl;
    row.delta_tau_mm = cells[c].dt;
    std::map<Regime, int> votes;
    for (std::size_t r = 0; r < reps; ++r) {
      const Outcome& o = outcomes[c * reps + r];
      ++row.runs;
      if (!o.ok) {
        ++row.failures;
        if (row.error.empty()) row.error = o.error;
        continue;
      }
      ++votes[o.label];
      row.phase_shift_deg += o.phase;
      row.peak_ratio += o.ratio;
      row.drops_per_cycle += o.drops;
    }
    const int ok = row.runs - row.failures;
    if (ok > 0) {
      row.phase_shift_deg /= ok;
      row.peak_ratio /= ok;
      row.drops_per_cycle /= ok;
      // ties go to the lower type, map order is TypeI < TypeII < TypeIII
      auto best = votes.begin();
      for (auto it = votes.begin(); it != votes.end(); ++it)
        if (it->second > best->second) best = it;
      row.label = to_string(best->first);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_csv(const std::vector<SweepRow>& rows, const Provenance& p) {
  std::ostringstream os;
  os << header_line(p) << '\n'
     << "beam_id,delta_L_mm,delta_tau_mm,label,phase_shift_deg,peak_ratio,drops_per_cycle,runs,"
        "failures,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.beam_id << ',' << format_number(r.delta_L_mm) << ',' << format_number(r.delta_tau_mm)
       << ',' << r.label << ',' << format_number(r.phase_shift_deg) << ','
       << format_number(r.peak_ratio) << ',' << format_number(r.drops_per_cycle) << ',' << r.runs
       << ',' << r.failures << ',' << err << '\n';
  }
  return os.str();
}

}  // namespace undulate
