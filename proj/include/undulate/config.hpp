#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "undulate/analysis.hpp"
#include "undulate/geometry.hpp"
#include "undulate/locomotion.hpp"
#include "undulate/trace.hpp"

namespace undulate {

/// Everything one run needs. Parsed from YAML where lengths are in mm; stored in SI.
struct RunConfig {
  std::string beam_id = "S_64";
  BeamSpec beam = beam_preset("S_64");
  double tendon_stiffness = 1800.0;
  ActuationProfile actuation;
  double dt_factor = 0.5;
  double global_viscous_damping = 2e-3;
  std::uint64_t seed = 0;
  int n_segments = 56;
  GroundModel ground;
  std::string output_directory = "out";
  double sample_rate = 100.0;
  ClassifierThresholds thresholds;

  void validate() const;
};

struct SweepPlan {
  std::vector<std::string> beams{"S_62", "S_64", "S_66"};
  std::vector<double> delta_L_list{0, 5, 10, 15};                // mm
  std::vector<double> delta_tau_list{15, 20, 25, 30, 35, 40};    // mm
  int repetitions = 10;

  void validate() const;
};

/// Strict parsers: unknown keys, missing required keys and bad values throw
/// ConfigError carrying "<source>:<line>:<column>" context.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path);
SweepPlan parse_sweep_plan(const std::string& text, const std::string& source = "<plan>");
SweepPlan load_sweep_plan(const std::string& path);

/// Canonical YAML rendering (mm units); parse_run_config round-trips it.
std::string to_yaml(const RunConfig& config);

/// FNV-1a 64 of the canonical rendering, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace undulate
