#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace undulate {

enum class Waveform { Triangle, Sine };

/// Single-actuator command. Lengths in metres, times in seconds.
struct ActuationProfile {
  double delta_L = 0.0;     // tendon shortening for pre-compression
  double delta_tau = 0.0;   // winding/unwinding amplitude per tendon
  Waveform waveform = Waveform::Triangle;
  double period = 2.0;
  int n_cycles = 10;
  double precompress_ramp = 1.0;

  void validate() const;
};

/// Time-sampled gauge and marker record of one run.
struct Trace {
  double sample_rate = 100.0;
  std::vector<double> times;
  std::vector<double> tension_left;
  std::vector<double> tension_right;
  std::vector<Eigen::Matrix2Xd> markers;  // one 2 x samples block per marker
  Eigen::Matrix2Xd com;                   // empty unless recorded
  ActuationProfile profile;
  std::string beam_id;
  double beam_length = 0.140;  // m, sets the marker-motion floor

  std::size_t size() const { return times.size(); }
  bool has_com() const { return com.cols() > 0; }
  /// Transverse (y) coordinate of a marker over time.
  Eigen::VectorXd marker_transverse(std::size_t marker) const {
    return markers.at(marker).row(1).transpose();
  }
  void validate() const;
};

}  // namespace undulate
