#pragma once

#include <vector>

#include <Eigen/Dense>

#include "undulate/geometry.hpp"
#include "undulate/rod.hpp"
#include "undulate/tendon.hpp"
#include "undulate/trace.hpp"

namespace undulate {

enum class FrictionMode { AnisotropicViscous, AnisotropicCoulomb };

/// Wheel-like ground: cheap to roll along the body, expensive to slide sideways.
/// Viscous coefficients are per node.
struct GroundModel {
  FrictionMode mode = FrictionMode::AnisotropicViscous;
  double c_longitudinal = 0.02;  // N s/m
  double c_lateral = 0.4;        // N s/m
  double coulomb_normal_load = 1.5e-3;  // N per node
  double mu_longitudinal = 0.05;
  double mu_lateral = 1.0;
  double velocity_scale = 1e-4;  // m/s, tanh regularisation of sign(v)

  void validate() const;
  /// Largest friction-to-mass rate over the nodes (1/s); bounds the explicit step.
  double max_damping_rate(const DiscreteBeam& beam) const;
};

/// Unit tangents from adjacent-node differences (one-sided at the ends).
Eigen::Matrix2Xd node_tangents(const Eigen::Matrix2Xd& positions);

/// Ground reaction per node. Always dissipative: F.v <= 0 node by node.
Eigen::Matrix2Xd friction_forces(const RodState& state, const GroundModel& ground);
void add_friction_forces(const Eigen::Matrix2Xd& positions, const Eigen::Matrix2Xd& velocities,
                         const GroundModel& ground, Eigen::Matrix2Xd& out);

struct LocomotionResult {
  Eigen::Matrix2Xd com_trajectory;  // one column per trace sample
  Eigen::Vector2d heading{-1.0, 0.0};  // unit vector from tail (B) to head (A) at rest
  double net_displacement = 0.0;    // m, COM travel along heading
  double mean_speed = 0.0;          // m/s
  double stride_displacement = 0.0; // m per actuation cycle
  std::vector<double> cycle_displacements;   // COM travel along heading per cycle
  std::vector<Eigen::Matrix2Xd> cycle_shapes; // full body at every cycle boundary
};

struct LocomotionRun {
  Trace trace;
  LocomotionResult result;
};

/// Free-floating robot on the ground: pre-compress, then drive for `duration`
/// seconds (rounded to whole cycles, at least 5). The motor end A is the head.
LocomotionRun simulate_locomotion(const DiscreteBeam& beam, const TendonPair& tendons,
                                  const ActuationProfile& profile, const GroundModel& ground,
                                  double duration, const ActuationOptions& options = {});

/// RMS node distance after best rigid alignment (Procrustes, no scaling).
double aligned_rms_distance(const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b);

/// Worst cycle-to-cycle aligned RMS distance of the body shape, ignoring
/// the first `skip_cycles` boundaries.
double limit_cycle_error(const LocomotionResult& result, int skip_cycles = 3);

}  // namespace undulate
