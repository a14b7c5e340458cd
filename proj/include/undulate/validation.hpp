#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "undulate/geometry.hpp"
#include "undulate/rod.hpp"

namespace undulate {

/// Pinned-pinned beam pushed quasi-statically: settle at each end shortening
/// and read the axial reaction at the moving pin.
struct BucklingPoint {
  double shortening = 0;  // m
  double force = 0;       // N, compressive
  double deflection = 0;  // m, max |y|
};

struct BucklingMeasurement {
  std::vector<BucklingPoint> points;
  double critical_force = 0;  // N, post-buckling plateau extrapolated to zero shortening
};

BucklingMeasurement measure_buckling(const BeamSpec& spec, int n_segments,
                                     const std::vector<double>& shortening_fractions = {0.005, 0.01, 0.02});

/// Random planar states near the rest shape of `beam`.
Eigen::Matrix2Xd random_state(const DiscreteBeam& beam, std::uint64_t seed, double noise_fraction = 0.2);

/// Largest |F - F_fd| / |F| over `samples` random states, central differences
/// of the energy evaluated in long double.
double gradient_check(const DiscreteBeam& beam, int samples, std::uint64_t seed);

/// Same check against any force routine; lets tests feed a deliberately broken one.
using ForceRoutine = std::function<Eigen::Matrix2Xd(const Eigen::Matrix2Xd&, const DiscreteBeam&)>;
double gradient_check(const DiscreteBeam& beam, int samples, std::uint64_t seed,
                      const ForceRoutine& forces);

/// Free damped rod from a random state: the largest step-to-step rise of the
/// leapfrog energy relative to the starting energy (<= 0 means monotone).
double dissipation_check(const DiscreteBeam& beam, int steps, std::uint64_t seed);

/// Free undamped rod: |p_end - p_0| / |p_0| after `steps` steps.
double momentum_check(const DiscreteBeam& beam, int steps, std::uint64_t seed);

struct OracleResult {
  std::string name;
  bool passed = false;
  double measured = 0;
  double limit = 0;
  std::string detail;
};

/// The built-in solver verification suite. Deterministic.
std::vector<OracleResult> run_validation();

}  // namespace undulate
