#pragma once

#include <functional>
#include <string>
#include <vector>

#include "undulate/analysis.hpp"
#include "undulate/config.hpp"
#include "undulate/io.hpp"
#include "undulate/locomotion.hpp"
#include "undulate/tendon.hpp"

namespace undulate {

/// The concrete objects a RunConfig describes.
struct Setup {
  DiscreteBeam beam;
  TendonPair tendons;
  Environment bench;  // end A clamped
  ActuationOptions options;
};
Setup make_setup(const RunConfig& config);

struct RunArtifacts {
  Trace trace;
  RegimeReport report;
  WaveMetrics wave;
  Provenance provenance;
  std::string trace_path;   // empty when not persisted
  std::string report_path;
};

/// precompress -> run_actuated -> classify_regime. Writes trace.csv and
/// report.json into `out_dir` unless it is empty.
RunArtifacts run_single(const RunConfig& config, const std::string& out_dir);

struct LocomotionArtifacts {
  LocomotionRun run;
  double limit_cycle_err = 0.0;
  Provenance provenance;
  std::string trace_path;
  std::string result_path;
};

/// Free robot on the configured ground for actuation.n_cycles periods.
LocomotionArtifacts run_locomotion(const RunConfig& config, const std::string& out_dir);

struct SweepRow {
  std::string beam_id;
  double delta_L_mm = 0;
  double delta_tau_mm = 0;
  std::string label;               // modal label, empty if every repetition failed
  double phase_shift_deg = 0;      // means over the successful repetitions
  double peak_ratio = 0;
  double drops_per_cycle = 0;      // per tendon
  int runs = 0;
  int failures = 0;
  std::string error;               // first failure message
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Every (beam, delta_L, delta_tau) cell, repetitions seeded base.seed + r.
/// Rows come back sorted by (beam, delta_L, delta_tau) whatever `jobs` is.
std::vector<SweepRow> run_sweep(const SweepPlan& plan, const RunConfig& base, int jobs,
                                const SweepProgress& progress = {});

std::string summary_csv(const std::vector<SweepRow>& rows, const Provenance& p);

}  // namespace undulate
