#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "undulate/geometry.hpp"
#include "undulate/rod.hpp"
#include "undulate/trace.hpp"

namespace undulate {

enum class Side { Left, Right };

/// A tendon routed A attachment -> midpoint guide -> B attachment.
/// Offsets are signed distances along the local left normal of each node.
struct TendonSpec {
  Side side = Side::Left;
  std::vector<int> routing_nodes;
  std::vector<double> lateral_offsets;
  double stiffness = 1800.0;  // N/m

  void validate(const DiscreteBeam& beam) const;
};

struct TendonPair {
  TendonSpec left;
  TendonSpec right;
};

inline constexpr double kDefaultTendonStiffness = 1800.0;

/// Mirror-image pair with offsets +-d/2 at the routing nodes.
TendonPair make_tendons(const DiscreteBeam& beam, double stiffness = kDefaultTendonStiffness);

/// Routing points (attachment, guide, attachment) in world coordinates.
using RoutePoints = Eigen::Matrix<double, 2, Eigen::Dynamic, Eigen::ColMajor, 2, 8>;
RoutePoints routing_points(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon);

double tendon_length(const RodState& state, const TendonSpec& tendon);
double tendon_length(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon);

struct RestLengths {
  double left;
  double right;
};

/// Zero-mean waveform of unit peak at phase s (seconds into actuation).
double waveform_value(Waveform w, double s, double period);

/// Commanded tendon rest lengths at protocol time t for a beam of length L.
RestLengths command_rest_lengths(const ActuationProfile& profile, double beam_length, double t);

/// Unilateral spring: k max(0, length - rest).
double tendon_tension(const RodState& state, const TendonSpec& tendon, double rest_length);
double tendon_tension(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                      double rest_length);

/// Stored elastic energy of a tendon, 1/2 k max(0, length - rest)^2.
double tendon_energy(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                     double rest_length);

/// Pulls at the routing points: each attachment is pulled toward its
/// neighbour, the guide by the sum of both segment pulls.
RoutePoints routing_point_forces(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                                      double rest_length);

/// Node forces of a tendon (N). Includes the couples that arise because the
/// routing points sit off the neutral axis; equal to -grad tendon_energy.
Eigen::Matrix2Xd tendon_forces(const RodState& state, const TendonSpec& tendon,
                               double rest_length);
void add_tendon_forces(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                       double rest_length, Eigen::Matrix2Xd& out);

/// Forces applied on top of elastic and tendon forces (ground contact, ...).
using ExtraForces = std::function<void(const RodState&, Eigen::Matrix2Xd&)>;

struct ActuationOptions {
  double sample_rate = 100.0;
  std::uint64_t seed = 0;
  std::optional<double> perturbation_sign;  // overrides the seeded sign
  double settle_tol = 1e-9;                   // J
  double settle_max_time = 10.0;              // s
  double dt_factor = 0.5;                     // dt = factor * stable_dt
  double dt_cap = 0.0;                        // extra step bound for stiff extra forces, 0: none
  ExtraForces extra_forces;
  bool record_com = false;
  std::function<void(const RodState&, long)> on_sample;  // called after each recorded sample
};

/// Protocol energy bookkeeping over the actuation phase.
struct EnergyAccount {
  double actuator_work = 0.0;   // -int T d(rest) summed over tendons
  double dissipated = 0.0;      // -int damping power
  double external_work = 0.0;   // int extra_forces . v
  double energy_start = 0.0;    // elastic + tendon + kinetic
  double energy_end = 0.0;
};

/// Ramp both tendons from L to L - delta_L, then relax to a static state.
RodState precompress(const DiscreteBeam& beam, const Environment& env, const TendonPair& tendons,
                     const ActuationProfile& profile, const ActuationOptions& options = {});

/// Pre-compress, then run n_cycles of antagonistic winding, sampling gauges
/// and markers at options.sample_rate. Trace times are protocol times.
Trace run_actuated(const DiscreteBeam& beam, const Environment& env, const TendonPair& tendons,
                   const ActuationProfile& profile, const ActuationOptions& options = {},
                   EnergyAccount* account = nullptr);

/// Default bench viscous damping per node (N s/m).
inline constexpr double kBenchViscousDamping = 2e-3;

}  // namespace undulate
