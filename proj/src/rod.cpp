#include "undulate/rod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace undulate {

namespace detail {

void check_sizes(Eigen::Index cols, const DiscreteBeam& beam) {
  if (beam.node_count < 3 || cols != beam.node_count)
    throw ConfigError("rod: state has " + std::to_string(cols) + " nodes, beam has " +
                      std::to_string(beam.node_count));
}

}  // namespace detail

RodState rest_state(const DiscreteBeam& beam) {
  RodState s;
  s.positions = beam.rest_positions;
  s.velocities = Eigen::Matrix2Xd::Zero(2, beam.node_count);
  return s;
}

void Environment::validate(int node_count) const {
  if (!(global_viscous_damping >= 0)) throw ConfigError("environment: damping must be >= 0");
  for (const auto& [node, pin] : fixed_nodes) {
    if (node < 0 || node >= node_count) throw ConfigError("environment: pinned node out of range");
    if (!pin.allFinite()) throw ConfigError("environment: pin point not finite");
  }
}

bool Environment::is_fixed(int node) const {
  return std::any_of(fixed_nodes.begin(), fixed_nodes.end(),
                     [node](const auto& p) { return p.first == node; });
}

Environment clamped_at_a(const DiscreteBeam& beam, double viscous_damping) {
  Environment env;
  env.global_viscous_damping = viscous_damping;
  env.fixed_nodes = {{0, beam.rest_positions.col(0)}, {1, beam.rest_positions.col(1)}};
  return env;
}

double add_internal_forces(const Eigen::Matrix2Xd& x, const Eigen::Matrix2Xd& v,
                           const DiscreteBeam& beam, Eigen::Matrix2Xd& out) {
  const double beta = beam.rayleigh_stiffness;
  double power = 0.0;
  for (int i = 0; i < beam.segment_count(); ++i) {
    const Eigen::Vector2d e = x.col(i + 1) - x.col(i);
    const double len = e.norm();
    const Eigen::Vector2d dir = e / len;
    const double rest = beam.segment_rest_lengths[i];
    const double k = beam.segment_stretch_stiffness[i] / rest;
    const double rate = dir.dot(v.col(i + 1) - v.col(i));
    const double damp = beta * k * rate;
    const Eigen::Vector2d pull = dir * (k * (len - rest) + damp);
    out.col(i) += pull;
    out.col(i + 1) -= pull;
    power -= damp * rate;
  }
  for (int j = 1; j + 1 < beam.node_count; ++j) {
    const auto t = detail::bend_terms<double>(x.col(j) - x.col(j - 1), x.col(j + 1) - x.col(j));
    const double c = beam.vertex_bend_stiffness[j - 1] / beam.vertex_voronoi_lengths[j - 1];
    // d kappa / dt through the three nodes
    const double rate = t.d_e1.dot(v.col(j) - v.col(j - 1)) + t.d_e2.dot(v.col(j + 1) - v.col(j));
    const double s = c * (t.kappa + beta * rate);
    out.col(j - 1) += s * t.d_e1;
    out.col(j) -= s * (t.d_e1 - t.d_e2);
    out.col(j + 1) -= s * t.d_e2;
    power -= beta * c * rate * rate;
  }
  return power;
}

double kinetic_energy(const RodState& state, const DiscreteBeam& beam) {
  return 0.5 * (state.velocities.colwise().squaredNorm().transpose().array() *
                beam.node_masses.array())
                   .sum();
}

Eigen::Vector2d linear_momentum(const RodState& state, const DiscreteBeam& beam) {
  return state.velocities * beam.node_masses;
}

Eigen::Vector2d center_of_mass(const Eigen::Matrix2Xd& positions, const DiscreteBeam& beam) {
  return positions * beam.node_masses / beam.total_mass();
}

double stable_dt(const DiscreteBeam& beam) {
  const int n = beam.node_count;
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < beam.segment_count(); ++i) {
    const double m = std::min(beam.node_masses[i], beam.node_masses[i + 1]);
    bound = std::min(bound, 0.5 * std::sqrt(m * beam.segment_rest_lengths[i] /
                                            beam.segment_stretch_stiffness[i]));
  }

  // Gershgorin bound on the largest eigenvalue of M^-1 K at the straight state.
  Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < beam.segment_count(); ++i) {
    const double k = beam.segment_stretch_stiffness[i] / beam.segment_rest_lengths[i];
    row[i] += 2.0 * k;
    row[i + 1] += 2.0 * k;
  }
  for (int j = 1; j + 1 < n; ++j) {
    const double h1 = beam.segment_rest_lengths[j - 1];
    const double h2 = beam.segment_rest_lengths[j];
    const double c = beam.vertex_bend_stiffness[j - 1] / beam.vertex_voronoi_lengths[j - 1];
    const double g[3] = {1.0 / h1, 1.0 / h1 + 1.0 / h2, 1.0 / h2};
    const double gsum = g[0] + g[1] + g[2];
    for (int a = 0; a < 3; ++a) row[j - 1 + a] += c * g[a] * gsum;
  }
  const double omega = std::sqrt((row.array() / beam.node_masses.array()).maxCoeff());
  const double xi = 0.5 * beam.rayleigh_stiffness * omega;
  const double damped = (std::sqrt(1.0 + xi * xi) - xi) / omega;
  return std::min(bound, damped);
}

void step_in_place(RodState& state, const DiscreteBeam& beam, const Environment& env,
                   const Eigen::Matrix2Xd& external_forces, double dt, double dt_bound,
                   Eigen::Matrix2Xd& force, StepDiagnostics* diag) {
  if (!(dt > 0.0) || !(dt < dt_bound))
    throw StabilityError("step: dt=" + std::to_string(dt) + " s not in (0, stable_dt=" +
                         std::to_string(dt_bound) + ")");
  if (!external_forces.allFinite()) throw NumericalError("step: non-finite external force", state.time);

  const Eigen::VectorXd& m = beam.node_masses;
  force = external_forces;
  double power = add_internal_forces(state.positions, state.velocities, beam, force);
  const double alpha = beam.rayleigh_mass;
  const double c = env.global_viscous_damping;
  for (int i = 0; i < beam.node_count; ++i) {
    const double drag = alpha * m[i] + c;
    force.col(i) += m[i] * env.gravity - drag * state.velocities.col(i);
    power -= drag * state.velocities.col(i).squaredNorm();
  }

  double kinetic_cross = 0.0;
  if (diag) {
    diag->damping_power = power;
    diag->staggered_energy = elastic_energy(state.positions, beam);
  }
  for (int i = 0; i < beam.node_count; ++i) {
    const Eigen::Vector2d v_new = state.velocities.col(i) + force.col(i) * (dt / m[i]);
    kinetic_cross += 0.5 * m[i] * v_new.dot(state.velocities.col(i));
    state.velocities.col(i) = v_new;
  }
  state.positions += dt * state.velocities;
  for (const auto& [node, pin] : env.fixed_nodes) {
    state.positions.col(node) = pin;
    state.velocities.col(node).setZero();
  }
  state.time += dt;
  if (diag) diag->staggered_energy += kinetic_cross;
  if (!state.finite()) throw NumericalError("step: state became non-finite", state.time);
}

RodState step(const RodState& state, const DiscreteBeam& beam, const Environment& env,
              const Eigen::Matrix2Xd& external_forces, double dt, StepDiagnostics* diag) {
  detail::check_sizes(state.positions.cols(), beam);
  if (state.velocities.cols() != state.positions.cols())
    throw ConfigError("step: velocity/position size mismatch");
  if (external_forces.cols() != beam.node_count)
    throw ConfigError("step: external force size mismatch");
  env.validate(beam.node_count);
  RodState next = state;
  Eigen::Matrix2Xd scratch(2, beam.node_count);
  step_in_place(next, beam, env, external_forces, dt, stable_dt(beam), scratch, diag);
  return next;
}

Perturbation seeded_perturbation(const DiscreteBeam& beam, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Perturbation p;
  p.node = beam.midpoint_node();
  p.magnitude = 1e-4 * beam.length;
  p.sign = (rng() >> 63) ? -1.0 : 1.0;
  return p;
}

void apply_perturbation(RodState& state, const DiscreteBeam& beam, const Perturbation& p) {
  const int node = p.node < 0 ? beam.midpoint_node() : p.node;
  // transverse to the local chord through the neighbours
  const Eigen::Vector2d chord =
      state.positions.col(std::min(node + 1, beam.node_count - 1)) - state.positions.col(std::max(node - 1, 0));
  const Eigen::Vector2d normal = Eigen::Vector2d(-chord.y(), chord.x()).normalized();
  state.positions.col(node) += p.sign * p.magnitude * normal;
}

SettleResult settle(RodState state, const DiscreteBeam& beam, const Environment& env,
                    const ForceProvider& forces, double tol_kinetic, double max_time,
                    const SettleOptions& options) {
  if (!(tol_kinetic > 0.0)) throw ConfigError("settle: tol_kinetic must be positive");
  detail::check_sizes(state.positions.cols(), beam);
  env.validate(beam.node_count);
  const double bound = stable_dt(beam);
  const double dt = options.dt > 0.0 ? options.dt : 0.5 * bound;
  if (options.perturbation) apply_perturbation(state, beam, *options.perturbation);

  SettleResult result;
  const double t0 = state.time;
  Eigen::Matrix2Xd scratch(2, beam.node_count);
  const Eigen::Matrix2Xd zero = Eigen::Matrix2Xd::Zero(2, beam.node_count);
  int quiet = 0;
  {
    // already in equilibrium: nothing to relax
    Eigen::Matrix2Xd f = forces ? forces(state) : zero;
    add_internal_forces(state.positions, state.velocities, beam, f);
    for (const auto& [node, pin] : env.fixed_nodes) f.col(node).setZero();
    if (kinetic_energy(state, beam) < tol_kinetic && f.cwiseAbs().maxCoeff() == 0.0 &&
        env.gravity.isZero()) {
      result.converged = true;
      result.state = std::move(state);
      return result;
    }
  }
  while (true) {
    if (kinetic_energy(state, beam) < tol_kinetic) {
      if (++quiet >= options.quiet_steps) {
        result.converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
    if (state.time - t0 >= max_time) break;
    const Eigen::Matrix2Xd ext = forces ? forces(state) : zero;
    step_in_place(state, beam, env, ext, dt, bound, scratch);
    ++result.steps;
  }
  result.elapsed = state.time - t0;
  result.state = std::move(state);
  return result;
}

}  // namespace undulate
