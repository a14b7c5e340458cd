#include "undulate/geometry.hpp"

#include <cmath>

namespace undulate {

void BeamSpec::validate() const {
  if (!(length > 0) || !(height > 0))
    throw ConfigError("beam: length and height must be positive");
  if (!(thickness_a > 0) || !(thickness_b > 0))
    throw ConfigError("beam: end thicknesses must be positive");
  if (!(youngs_modulus > 0) || !(density > 0))
    throw ConfigError("beam: youngs_modulus and density must be positive");
  if (!(rayleigh_mass >= 0) || !(rayleigh_stiffness >= 0))
    throw ConfigError("beam: rayleigh damping coefficients must be >= 0");
}

bool is_beam_preset(const std::string& id) {
  return id == "S_62" || id == "S_64" || id == "S_66";
}

BeamSpec beam_preset(const std::string& id) {
  BeamSpec spec;
  spec.thickness_a = 0.006;
  if (id == "S_62")
    spec.thickness_b = 0.002;
  else if (id == "S_64")
    spec.thickness_b = 0.004;
  else if (id == "S_66")
    spec.thickness_b = 0.006;
  else
    throw ConfigError("unknown beam preset '" + id + "' (expected S_62, S_64 or S_66)");
  return spec;
}

DiscreteBeam discretize(const BeamSpec& spec, int n_segments) {
  spec.validate();
  if (n_segments < 8) throw ConfigError("discretize: need at least 8 segments");

  const int n = n_segments + 1;
  const double pitch = spec.length / n_segments;
  const double E = spec.youngs_modulus;
  const double H = spec.height;

  DiscreteBeam beam;
  beam.node_count = n;
  beam.length = spec.length;
  beam.rayleigh_mass = spec.rayleigh_mass;
  beam.rayleigh_stiffness = spec.rayleigh_stiffness;
  beam.rest_positions = Eigen::Matrix2Xd::Zero(2, n);
  beam.node_thickness.resize(n);
  for (int i = 0; i < n; ++i) {
    const double l = (i == n - 1) ? spec.length : i * pitch;
    beam.rest_positions(0, i) = l;
    beam.node_thickness[i] = thickness_at(spec, l);
  }

  // taken from the node coordinates so the rest state is exactly strain free
  beam.segment_rest_lengths =
      (beam.rest_positions.row(0).tail(n_segments) - beam.rest_positions.row(0).head(n_segments)).transpose();
  beam.segment_stretch_stiffness.resize(n_segments);
  beam.node_masses = Eigen::VectorXd::Zero(n);
  const double rho_h = spec.density * H;
  for (int i = 0; i < n_segments; ++i) {
    const double d0 = beam.node_thickness[i];
    const double d1 = beam.node_thickness[i + 1];
    beam.segment_stretch_stiffness[i] = E * H * 0.5 * (d0 + d1);
    // Trapezoid over the segment, split half to each end; exact for a linear taper.
    const double m = rho_h * beam.segment_rest_lengths[i] * 0.5 * (d0 + d1);
    beam.node_masses[i] += 0.5 * m;
    beam.node_masses[i + 1] += 0.5 * m;
  }

  beam.vertex_bend_stiffness.resize(n - 2);
  beam.vertex_voronoi_lengths.resize(n - 2);
  for (int j = 1; j < n - 1; ++j) {
    beam.vertex_bend_stiffness[j - 1] = E * second_moment(beam.node_thickness[j], H);
    beam.vertex_voronoi_lengths[j - 1] =
        0.5 * (beam.segment_rest_lengths[j - 1] + beam.segment_rest_lengths[j]);
  }

  // Markers at k*L/8 for k = 1..8; the A end is held by the bench so it is skipped.
  beam.marker_indices.reserve(kMarkerCount);
  for (int k = 1; k <= kMarkerCount; ++k)
    beam.marker_indices.push_back(
        static_cast<int>(std::lround(static_cast<double>(k) * n_segments / kMarkerCount)));
  return beam;
}

}  // namespace undulate
