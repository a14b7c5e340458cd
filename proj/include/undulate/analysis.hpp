#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "undulate/errors.hpp"
#include "undulate/trace.hpp"

namespace undulate {

/// Lag (in samples, sub-sample refined) maximising the Pearson correlation of
/// a[i] against b[i + lag], searched over |lag| <= max_lag. Positive means b
/// trails a.
double correlation_lag(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, int max_lag);

/// Phase between two periodic signals in [0, 180] degrees.
double phase_shift(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, double period, double sample_rate);

/// Signed phase lag of `b` behind `a` in (-180, 180] degrees.
double phase_lag(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b, double period, double sample_rate);

struct DropParams {
  double drop_fraction = 0.3;  // of the running cycle peak
  double drop_window = 0.05;   // s
  double refractory = 0.1;     // s
  double peak_window = 2.0;    // s, trailing window for the running peak
};

/// Times (s from the first sample) of sudden tension drops.
std::vector<double> detect_tension_drops(const Eigen::Ref<const Eigen::VectorXd>& tension,
                                         double sample_rate, const DropParams& params = {});

enum class Regime { TypeI, TypeII, TypeIII };
std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

/// Every classifier threshold in one place.
struct ClassifierThresholds {
  double phase_cut_deg = 170.0;
  double peak_ratio_equal = 1.4;      // TYPE III upper bound
  double peak_ratio_unequal = 1.5;    // TYPE II lower bound
  double drops_per_cycle = 0.5;       // per tendon, to count as "has drops"
  double skip_cycles = 1.0;           // transient discarded before analysis
  int min_cycles = 3;
  DropParams drops;
};

struct RegimeReport {
  Regime label = Regime::TypeI;
  double phase_shift_deg = 0.0;
  std::vector<double> drop_events_left;
  std::vector<double> drop_events_right;
  double peak_ratio = 1.0;
  std::vector<double> marker_phase_lags_deg;
};

RegimeReport classify_regime(const Trace& trace, const ClassifierThresholds& th = {});

struct WaveMetrics {
  std::vector<double> lags_deg;       // per marker; NaN when excluded
  std::vector<int> excluded_markers;  // amplitude below 1e-5 L
  double traveling_wave_index = 0.0;
};

/// Per-marker transverse phase lags relative to the first usable marker and
/// the Spearman correlation between marker order and unwrapped lag.
WaveMetrics wave_metrics(const Trace& trace, double beam_length, double skip_cycles = 1.0);

/// Spearman rank correlation with average ranks for ties; 0 if either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace undulate
