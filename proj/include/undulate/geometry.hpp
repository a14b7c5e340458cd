#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "undulate/errors.hpp"

namespace undulate {

enum class Taper { Linear };

/// Parametric variable-thickness beam. All lengths in metres, SI throughout.
/// End A (l = 0) is the actuated end, end B (l = L) the free tail.
struct BeamSpec {
  double length = 0.140;
  double height = 0.010;
  double thickness_a = 0.006;
  double thickness_b = 0.004;
  Taper taper = Taper::Linear;
  double youngs_modulus = 2.0e6;
  double density = 1100.0;
  double rayleigh_mass = 0.1;         // alpha, 1/s
  double rayleigh_stiffness = 1.0e-5;  // beta, s

  void validate() const;
};

/// Built-in presets named after their end thicknesses in mm (A, B).
BeamSpec beam_preset(const std::string& id);
bool is_beam_preset(const std::string& id);

/// Local thickness at arclength l from end A. d(0) = d_A, d(L) = d_B.
template <typename Scalar>
Scalar thickness_at(const BeamSpec& spec, Scalar l) {
  if (!(l >= Scalar(0)) || !(l <= Scalar(spec.length)))
    throw DomainError("thickness_at: arclength outside [0, L]");
  const Scalar dA(spec.thickness_a), dB(spec.thickness_b);
  if (l == Scalar(spec.length)) return dB;
  return dA + (dB - dA) * (l / Scalar(spec.length));
}

/// Rectangular section bending about the height axis: I = H d^3 / 12.
template <typename Scalar>
Scalar second_moment(Scalar d, Scalar h) {
  if (!(d > Scalar(0)) || !(h > Scalar(0)))
    throw DomainError("second_moment: thickness and height must be positive");
  return h * d * d * d / Scalar(12);
}

/// Lumped discretization of a BeamSpec along the x axis, A at the origin.
///
/// Segment i joins nodes i and i+1; bending lives on interior nodes
/// 1..n-2 and is stored at index j-1 for node j.
struct DiscreteBeam {
  int node_count = 0;
  Eigen::Matrix2Xd rest_positions;
  Eigen::VectorXd segment_rest_lengths;       // n-1
  Eigen::VectorXd segment_stretch_stiffness;  // EA, n-1
  Eigen::VectorXd vertex_bend_stiffness;      // EI, n-2
  Eigen::VectorXd vertex_voronoi_lengths;     // n-2
  Eigen::VectorXd node_masses;                // n
  Eigen::VectorXd node_thickness;             // n, used for tendon offsets
  std::vector<int> marker_indices;
  double rayleigh_mass = 0.0;
  double rayleigh_stiffness = 0.0;
  double length = 0.0;

  int segment_count() const { return node_count - 1; }
  double total_mass() const { return node_masses.sum(); }
  /// Node nearest to l = L/2 (the tendon guide).
  int midpoint_node() const { return segment_count() / 2; }
};

inline constexpr int kDefaultSegments = 56;
inline constexpr int kMarkerCount = 8;

DiscreteBeam discretize(const BeamSpec& spec, int n_segments = kDefaultSegments);

}  // namespace undulate
