// End-to-end acceptance checks, one PASS/FAIL line each. Runs serially.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "undulate/config.hpp"
#include "undulate/harness.hpp"
#include "undulate/io.hpp"
#include "undulate/locomotion.hpp"
#include "undulate/validation.hpp"

using namespace undulate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig bench(const std::string& beam, double dl_mm, double dtau_mm) {
  RunConfig c;
  c.beam_id = beam;
  c.beam = beam_preset(beam);
  c.actuation.delta_L = dl_mm * 1e-3;
  c.actuation.delta_tau = dtau_mm * 1e-3;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Analytic Euler load of a pinned-pinned rectangular strip.
double euler_load(double E, double H, double d, double L) {
  const double I = H * d * d * d / 12.0;
  return std::numbers::pi * std::numbers::pi * E * I / (L * L);
}

Outcome euler_buckling() {
  const auto t0 = std::chrono::steady_clock::now();
  const BeamSpec s = beam_preset("S_66");
  const double p_cr = euler_load(s.youngs_modulus, s.height, s.thickness_a, s.length);
  const BucklingMeasurement m = measure_buckling(s, kDefaultSegments);
  const double err = std::abs(m.critical_force - p_cr) / p_cr;
  const double took = seconds_since(t0);
  return {err < 0.05 && took < 60,
          fmt("measured %.5f N, analytic %.5f N, error %.2f%%, %.1f s", m.critical_force, p_cr, 100 * err, took)};
}

Outcome gradient_consistency() {
  const auto t0 = std::chrono::steady_clock::now();
  using Long = long double;
  double worst = 0;
  for (const char* id : {"S_62", "S_64", "S_66"}) {
    const DiscreteBeam b = discretize(beam_preset(id));
    const Long h = 1e-8L * b.length;
    for (int s = 0; s < 34; ++s) {
      const Eigen::Matrix2Xd x = random_state(b, 1000 + static_cast<std::uint64_t>(s));
      const Eigen::Matrix2Xd f = elastic_forces(x, b);
      Points<Long> xl = x.cast<Long>();
      Eigen::Matrix2Xd fd(2, x.cols());
      for (int i = 0; i < x.cols(); ++i)
        for (int d = 0; d < 2; ++d) {
          const Long keep = xl(d, i);
          xl(d, i) = keep + h;
          const Long up = elastic_energy(xl, b);
          xl(d, i) = keep - h;
          const Long down = elastic_energy(xl, b);
          xl(d, i) = keep;
          fd(d, i) = static_cast<double>((down - up) / (2 * h));
        }
      worst = std::max(worst, (f - fd).norm() / f.norm());
    }
  }
  const double took = seconds_since(t0);
  return {worst < 1e-5 && took < 10, fmt("worst relative error %.3g over 102 states, %.1f s", worst, took)};
}

struct Exemplars {
  RunArtifacts type1, type2, type3;
  double seconds = 0;
};

Exemplars run_exemplars() {
  const auto t0 = std::chrono::steady_clock::now();
  Exemplars e;
  e.type1 = run_single(bench("S_64", 0, 15), "");
  e.type2 = run_single(bench("S_64", 15, 35), "");
  e.type3 = run_single(bench("S_64", 10, 35), "");
  e.seconds = seconds_since(t0);
  return e;
}

std::string describe(const RunArtifacts& a) {
  return fmt("%s phase %.1f ratio %.2f drops %zu/%zu", to_string(a.report.label).c_str(), a.report.phase_shift_deg,
             a.report.peak_ratio, a.report.drop_events_left.size(), a.report.drop_events_right.size());
}

Outcome regime_exemplars(const Exemplars& e) {
  const RegimeReport& r1 = e.type1.report;
  const RegimeReport& r2 = e.type2.report;
  const RegimeReport& r3 = e.type3.report;
  const bool one = r1.label == Regime::TypeI && r1.phase_shift_deg >= 160 && r1.phase_shift_deg <= 180 &&
                   r1.drop_events_left.empty() && r1.drop_events_right.empty();
  const bool single_sided = r2.drop_events_left.empty() != r2.drop_events_right.empty();
  const bool two = r2.label == Regime::TypeII && (r2.peak_ratio >= 1.5 || single_sided);
  const bool three = r3.label == Regime::TypeIII && !r3.drop_events_left.empty() &&
                     !r3.drop_events_right.empty() && r3.phase_shift_deg < 170;
  return {one && two && three && e.seconds < 300,
          fmt("(0,15) %s [%s]; (15,35) %s [%s]; (10,35) %s [%s]; %.0f s", describe(e.type1).c_str(),
              one ? "ok" : "miss", describe(e.type2).c_str(), two ? "ok" : "miss", describe(e.type3).c_str(),
              three ? "ok" : "miss", e.seconds)};
}

Outcome unshortened_row() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepPlan plan;
  plan.delta_L_list = {0};
  plan.repetitions = 1;
  const auto rows = run_sweep(plan, bench("S_64", 0, 15), 1, nullptr);
  int type1 = 0;
  std::string misses;
  for (const auto& r : rows) {
    if (r.label == "TypeI") {
      ++type1;
    } else {
      misses += fmt(" %s/%g=%s", r.beam_id.c_str(), r.delta_tau_mm, r.label.c_str());
    }
  }
  const double took = seconds_since(t0);
  return {type1 == static_cast<int>(rows.size()) && rows.size() == 18 && took < 600,
          fmt("%d of %zu cells TypeI%s, %.0f s", type1, rows.size(), misses.c_str(), took)};
}

Outcome traveling_wave(const Exemplars& e) {
  const double index = e.type3.wave.traveling_wave_index;
  double spread = 0;
  bool all_finite = true;
  for (double lag : e.type1.wave.lags_deg) {
    if (std::isnan(lag)) {
      all_finite = false;
      continue;
    }
    spread = std::max(spread, std::abs(lag));
  }
  return {index >= 0.8 && spread <= 10 && all_finite,
          fmt("wave index at (10,35) %.2f; largest marker lag at (0,15) %.1f deg", index, spread)};
}

Outcome locomotion_sign(std::string& note) {
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const TendonPair t = make_tendons(b);
  ActuationProfile p;
  p.delta_L = 0.010;
  p.delta_tau = 0.035;
  p.n_cycles = 10;
  GroundModel wheels;
  wheels.c_lateral = 20 * wheels.c_longitudinal;
  GroundModel flat;
  flat.c_lateral = flat.c_longitudinal;
  const LocomotionResult fwd = simulate_locomotion(b, t, p, wheels, 10 * p.period).result;
  const LocomotionResult iso = simulate_locomotion(b, t, p, flat, 10 * p.period).result;
  bool sustained = fwd.net_displacement > 0;
  for (std::size_t c = 3; c < fwd.cycle_displacements.size(); ++c) sustained = sustained && fwd.cycle_displacements[c] > 0;
  const bool still = std::abs(iso.net_displacement) < 0.02 * b.length;

  ActuationOptions other;
  other.perturbation_sign = -seeded_perturbation(b, 0).sign;
  const LocomotionResult flip = simulate_locomotion(b, t, p, wheels, 10 * p.period, other).result;
  note = fmt("opposite buckling branch at ratio 20: net %.2f mm", 1e3 * flip.net_displacement);
  return {sustained && still, fmt("ratio 20 net %.2f mm (%.3f mm/cycle after transient); ratio 1 net %.3f mm, limit %.1f mm",
                                  1e3 * fwd.net_displacement, 1e3 * fwd.cycle_displacements.back(),
                                  1e3 * iso.net_displacement, 1e3 * 0.02 * b.length)};
}

Outcome conservation() {
  // momentum: undamped free rod, 1000 steps
  DiscreteBeam b = discretize(beam_preset("S_62"), 28);
  b.rayleigh_mass = b.rayleigh_stiffness = 0;
  RodState s = rest_state(b);
  s.positions = random_state(b, 21, 0.05);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < b.node_count; ++i) s.velocities.col(i) = Eigen::Vector2d(0.2 + u(rng), -0.1 + u(rng));
  const Eigen::Vector2d p0 = s.velocities * b.node_masses;
  const Eigen::Matrix2Xd zero = Eigen::Matrix2Xd::Zero(2, b.node_count);
  Eigen::Matrix2Xd scratch(2, b.node_count);
  double bound = stable_dt(b);
  for (int k = 0; k < 1000; ++k) step_in_place(s, b, Environment{}, zero, 0.5 * bound, bound, scratch);
  const double drift = (s.velocities * b.node_masses - p0).norm() / p0.norm();

  // dissipation: damped clamped rod released from a bent shape
  const DiscreteBeam d = discretize(beam_preset("S_64"), 28);
  RodState r = rest_state(d);
  for (int i = 2; i < d.node_count; ++i) r.positions(1, i) = 0.01 * std::pow(d.rest_positions(0, i) / d.length, 2);
  const Environment env = clamped_at_a(d, kBenchViscousDamping);
  bound = stable_dt(d);
  StepDiagnostics diag;
  step_in_place(r, d, env, zero.leftCols(d.node_count), 0.5 * bound, bound, scratch, &diag);
  double prev = diag.staggered_energy;
  const double start = prev;
  double worst_rise = 0;
  for (int k = 0; k < 20000; ++k) {
    step_in_place(r, d, env, zero.leftCols(d.node_count), 0.5 * bound, bound, scratch, &diag);
    worst_rise = std::max(worst_rise, (diag.staggered_energy - prev) / start);
    prev = diag.staggered_energy;
  }

  // work: the actuator pays for what is stored and what is damped
  const DiscreteBeam w = discretize(beam_preset("S_64"));
  ActuationProfile p;
  p.delta_L = 0.010;
  p.delta_tau = 0.035;
  p.n_cycles = 3;
  EnergyAccount acc;
  run_actuated(w, clamped_at_a(w, kBenchViscousDamping), make_tendons(w), p, {}, &acc);
  const double needed = acc.energy_end - acc.energy_start + acc.dissipated;
  const bool work_ok = acc.actuator_work >= needed - 0.02 * std::abs(acc.actuator_work);

  return {drift < 1e-10 && worst_rise <= 1e-12 && work_ok,
          fmt("momentum drift %.2g; largest energy rise %.2g of start; work %.4g J vs gained+dissipated %.4g J",
              drift, worst_rise, acc.actuator_work, needed)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("undulate_acceptance_" + std::to_string(::getpid()));
  RunConfig c = bench("S_64", 10, 35);
  c.actuation.n_cycles = 3;
  run_single(c, (root / "a").string());
  run_single(c, (root / "b").string());
  const bool same = slurp(root / "a" / "trace.csv") == slurp(root / "b" / "trace.csv") &&
                    !slurp(root / "a" / "trace.csv").empty();

  SweepPlan plan;
  plan.beams = {"S_64", "S_66"};
  plan.delta_L_list = {0, 10};
  plan.delta_tau_list = {35};
  plan.repetitions = 2;
  const Provenance prov{config_hash(c), c.seed};
  const std::string serial = summary_csv(run_sweep(plan, c, 1, nullptr), prov);
  const std::string parallel = summary_csv(run_sweep(plan, c, 4, nullptr), prov);
  fs::remove_all(root);
  return {same && serial == parallel,
          fmt("trace csv %s; sweep summary jobs=1 vs jobs=4 %s", same ? "byte-identical" : "differs",
              serial == parallel ? "identical" : "differs")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* name, const Outcome& o) {
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  auto guarded = [&](const char* name, const std::function<Outcome()>& f) {
    try {
      report(name, f());
    } catch (const std::exception& e) {
      report(name, {false, std::string("error: ") + e.what()});
    }
  };

  guarded("euler_buckling", euler_buckling);
  guarded("gradient", gradient_consistency);
  Exemplars ex;
  bool have_exemplars = false;
  guarded("regime_exemplars", [&] {
    ex = run_exemplars();
    have_exemplars = true;
    return regime_exemplars(ex);
  });
  guarded("unshortened_row", unshortened_row);
  guarded("traveling_wave", [&] {
    if (!have_exemplars) return Outcome{false, "exemplar runs failed"};
    return traveling_wave(ex);
  });
  std::string note;
  guarded("locomotion_sign", [&] { return locomotion_sign(note); });
  if (!note.empty()) std::printf("      %s\n", note.c_str());
  guarded("conservation", conservation);
  guarded("determinism", determinism);
  std::printf("%d of 8 failed\n", failed);
  return failed ? 1 : 0;
}
