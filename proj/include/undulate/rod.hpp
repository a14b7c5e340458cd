#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "undulate/errors.hpp"
#include "undulate/geometry.hpp"

namespace undulate {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, 2, Eigen::Dynamic>;

struct RodState {
  double time = 0.0;
  Eigen::Matrix2Xd positions;
  Eigen::Matrix2Xd velocities;

  int node_count() const { return static_cast<int>(positions.cols()); }
  bool finite() const { return positions.allFinite() && velocities.allFinite(); }
};

/// Rest configuration of a beam, at rest.
RodState rest_state(const DiscreteBeam& beam);

struct Environment {
  Eigen::Vector2d gravity = Eigen::Vector2d::Zero();
  double global_viscous_damping = 0.0;  // N s/m per node
  std::vector<std::pair<int, Eigen::Vector2d>> fixed_nodes;

  void validate(int node_count) const;
  bool is_fixed(int node) const;
};

/// Pin nodes 0 and 1 at their rest points: position and tangent of end A held.
Environment clamped_at_a(const DiscreteBeam& beam, double viscous_damping);

namespace detail {

template <typename Scalar>
struct BendTerms {
  Scalar kappa;       // 2 tan(phi / 2)
  Vec2<Scalar> d_e1;  // d kappa / d e1
  Vec2<Scalar> d_e2;  // d kappa / d e2
};

// kappa = 2 (e1 x e2) / (|e1||e2| + e1.e2), which equals 2 tan(phi/2).
template <typename Scalar>
BendTerms<Scalar> bend_terms(const Vec2<Scalar>& e1, const Vec2<Scalar>& e2) {
  using std::sqrt;
  const Scalar cross = e1.x() * e2.y() - e1.y() * e2.x();
  const Scalar n1 = sqrt(e1.squaredNorm());
  const Scalar n2 = sqrt(e2.squaredNorm());
  const Scalar denom = n1 * n2 + e1.dot(e2);
  const Vec2<Scalar> dcross_e1(e2.y(), -e2.x());
  const Vec2<Scalar> dcross_e2(-e1.y(), e1.x());
  const Vec2<Scalar> ddenom_e1 = e1 * (n2 / n1) + e2;
  const Vec2<Scalar> ddenom_e2 = e2 * (n1 / n2) + e1;
  const Scalar inv = Scalar(2) / (denom * denom);
  return {Scalar(2) * cross / denom, (dcross_e1 * denom - ddenom_e1 * cross) * inv,
          (dcross_e2 * denom - ddenom_e2 * cross) * inv};
}

void check_sizes(Eigen::Index cols, const DiscreteBeam& beam);

}  // namespace detail

/// Stretch + bend energy of a planar configuration (J).
template <typename Derived>
typename Derived::Scalar elastic_energy(const Eigen::MatrixBase<Derived>& positions,
                                        const DiscreteBeam& beam) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  detail::check_sizes(positions.cols(), beam);
  const Points<Scalar> x = positions;
  Scalar energy(0);
  for (int i = 0; i < beam.segment_count(); ++i) {
    const Scalar rest(beam.segment_rest_lengths[i]);
    const Scalar strain = sqrt((x.col(i + 1) - x.col(i)).squaredNorm()) - rest;
    energy += Scalar(0.5) * Scalar(beam.segment_stretch_stiffness[i]) / rest * strain * strain;
  }
  for (int j = 1; j + 1 < beam.node_count; ++j) {
    const Vec2<Scalar> e1 = x.col(j) - x.col(j - 1);
    const Vec2<Scalar> e2 = x.col(j + 1) - x.col(j);
    const Scalar cross = e1.x() * e2.y() - e1.y() * e2.x();
    const Scalar kappa = Scalar(2) * cross / (sqrt(e1.squaredNorm() * e2.squaredNorm()) + e1.dot(e2));
    energy += Scalar(0.5) * Scalar(beam.vertex_bend_stiffness[j - 1]) /
              Scalar(beam.vertex_voronoi_lengths[j - 1]) * kappa * kappa;
  }
  return energy;
}

/// -grad elastic_energy, one column per node (N).
template <typename Derived>
Points<typename Derived::Scalar> elastic_forces(const Eigen::MatrixBase<Derived>& positions,
                                                const DiscreteBeam& beam) {
  using Scalar = typename Derived::Scalar;
  using std::sqrt;
  detail::check_sizes(positions.cols(), beam);
  const Points<Scalar> x = positions;
  Points<Scalar> f = Points<Scalar>::Zero(2, x.cols());
  for (int i = 0; i < beam.segment_count(); ++i) {
    const Vec2<Scalar> e = x.col(i + 1) - x.col(i);
    const Scalar len = sqrt(e.squaredNorm());
    const Scalar rest(beam.segment_rest_lengths[i]);
    const Vec2<Scalar> pull = e * (Scalar(beam.segment_stretch_stiffness[i]) / rest * (len - rest) / len);
    f.col(i) += pull;
    f.col(i + 1) -= pull;
  }
  for (int j = 1; j + 1 < beam.node_count; ++j) {
    const auto t = detail::bend_terms<Scalar>(x.col(j) - x.col(j - 1), x.col(j + 1) - x.col(j));
    const Scalar c = Scalar(beam.vertex_bend_stiffness[j - 1]) /
                     Scalar(beam.vertex_voronoi_lengths[j - 1]) * t.kappa;
    f.col(j - 1) += c * t.d_e1;
    f.col(j) -= c * (t.d_e1 - t.d_e2);
    f.col(j + 1) -= c * t.d_e2;
  }
  return f;
}

/// Elastic forces plus stiffness-proportional (strain-rate) damping, accumulated
/// into `out`. Returns the damping power (W, <= 0).
double add_internal_forces(const Eigen::Matrix2Xd& positions, const Eigen::Matrix2Xd& velocities,
                           const DiscreteBeam& beam, Eigen::Matrix2Xd& out);

double kinetic_energy(const RodState& state, const DiscreteBeam& beam);
Eigen::Vector2d linear_momentum(const RodState& state, const DiscreteBeam& beam);
Eigen::Vector2d center_of_mass(const Eigen::Matrix2Xd& positions, const DiscreteBeam& beam);

/// Conservative explicit step bound. Starts from 0.5 min sqrt(m l / EA) and
/// tightens for bending stiffness and stiffness-proportional damping.
double stable_dt(const DiscreteBeam& beam);

struct StepDiagnostics {
  double damping_power = 0.0;  // W, from the pre-step velocities
  // U(x_n) + 1/2 sum m v_{n-1/2}.v_{n+1/2}: the leapfrog energy at the start of the step.
  double staggered_energy = 0.0;
};

/// Symplectic Euler: v += dt F/m, then x += dt v. Fixed nodes are reset to
/// their pins with zero velocity.
RodState step(const RodState& state, const DiscreteBeam& beam, const Environment& env,
              const Eigen::Matrix2Xd& external_forces, double dt,
              StepDiagnostics* diag = nullptr);

/// In-place variant for hot loops; `dt` is checked against `dt_bound` only.
void step_in_place(RodState& state, const DiscreteBeam& beam, const Environment& env,
                   const Eigen::Matrix2Xd& external_forces, double dt, double dt_bound,
                   Eigen::Matrix2Xd& scratch, StepDiagnostics* diag = nullptr);

using ForceProvider = std::function<Eigen::Matrix2Xd(const RodState&)>;

struct Perturbation {
  int node = -1;  // -1: midpoint node
  double magnitude = 0.0;
  double sign = 1.0;
};

/// Seeded symmetry breaker: 1e-4 L at the midpoint, sign from the seed.
Perturbation seeded_perturbation(const DiscreteBeam& beam, std::uint64_t seed);
void apply_perturbation(RodState& state, const DiscreteBeam& beam, const Perturbation& p);

struct SettleOptions {
  double dt = 0.0;  // 0: half of stable_dt
  int quiet_steps = 100;
  std::optional<Perturbation> perturbation;
};

struct SettleResult {
  RodState state;
  bool converged = false;
  double elapsed = 0.0;  // simulated seconds spent
  long steps = 0;
};

/// Dynamic relaxation: step until kinetic energy stays below tol for
/// `quiet_steps` consecutive steps, or `max_time` of simulated time passes.
SettleResult settle(RodState state, const DiscreteBeam& beam, const Environment& env,
                    const ForceProvider& forces, double tol_kinetic, double max_time,
                    const SettleOptions& options = {});

}  // namespace undulate
