#include "undulate/tendon.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace undulate {

namespace {

// Nodes whose difference defines the tangent at routing node `node`.
std::pair<int, int> tangent_nodes(int node, int n) {
  if (node == 0) return {0, 1};
  if (node == n - 1) return {n - 2, n - 1};
  return {node - 1, node + 1};
}

Eigen::Vector2d left_normal(const Eigen::Vector2d& u) { return Eigen::Vector2d(-u.y(), u.x()); }

}  // namespace

void TendonSpec::validate(const DiscreteBeam& beam) const {
  if (routing_nodes.size() != 3 || lateral_offsets.size() != routing_nodes.size())
    throw ConfigError("tendon: expected three routing nodes with one offset each");
  if (routing_nodes.front() != 0 || routing_nodes.back() != beam.node_count - 1)
    throw ConfigError("tendon: routing must start at node 0 and end at the last node");
  if (routing_nodes[1] != beam.midpoint_node())
    throw ConfigError("tendon: guide must sit at the midpoint node");
  for (std::size_t k = 1; k < routing_nodes.size(); ++k)
    if (routing_nodes[k] <= routing_nodes[k - 1])
      throw ConfigError("tendon: routing nodes must be strictly increasing");
  if (!(stiffness > 0)) throw ConfigError("tendon: stiffness must be positive");
}

TendonPair make_tendons(const DiscreteBeam& beam, double stiffness) {
  TendonPair pair;
  const std::vector<int> nodes = {0, beam.midpoint_node(), beam.node_count - 1};
  pair.left.side = Side::Left;
  pair.right.side = Side::Right;
  for (TendonSpec* t : {&pair.left, &pair.right}) {
    t->routing_nodes = nodes;
    t->stiffness = stiffness;
    const double sign = t->side == Side::Left ? 1.0 : -1.0;
    for (int node : nodes) t->lateral_offsets.push_back(sign * 0.5 * beam.node_thickness[node]);
  }
  pair.left.validate(beam);
  pair.right.validate(beam);
  return pair;
}

RoutePoints routing_points(const Eigen::Matrix2Xd& x, const TendonSpec& tendon) {
  if (tendon.routing_nodes.size() > 8) throw ConfigError("tendon: at most 8 routing nodes");
  const int n = static_cast<int>(x.cols());
  RoutePoints p(2, tendon.routing_nodes.size());
  for (std::size_t k = 0; k < tendon.routing_nodes.size(); ++k) {
    const int node = tendon.routing_nodes[k];
    const auto [a, b] = tangent_nodes(node, n);
    p.col(k) = x.col(node) + tendon.lateral_offsets[k] * left_normal(x.col(b) - x.col(a)).normalized();
  }
  return p;
}

double tendon_length(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon) {
  const RoutePoints p = routing_points(positions, tendon);
  double len = 0.0;
  for (Eigen::Index k = 0; k + 1 < p.cols(); ++k) len += (p.col(k + 1) - p.col(k)).norm();
  return len;
}

double tendon_length(const RodState& state, const TendonSpec& tendon) {
  return tendon_length(state.positions, tendon);
}

double waveform_value(Waveform w, double s, double period) {
  const double u = s / period - std::floor(s / period);
  switch (w) {
    case Waveform::Sine:
      return std::sin(2.0 * std::numbers::pi * u);
    case Waveform::Triangle:
      if (u < 0.25) return 4.0 * u;
      if (u < 0.75) return 2.0 - 4.0 * u;
      return 4.0 * u - 4.0;
  }
  return 0.0;
}

RestLengths command_rest_lengths(const ActuationProfile& profile, double beam_length, double t) {
  const double base = beam_length - profile.delta_L;
  if (t < profile.precompress_ramp) {
    const double r = beam_length - profile.delta_L * (t / profile.precompress_ramp);
    return {r, r};
  }
  const double delta = profile.delta_tau *
                       waveform_value(profile.waveform, t - profile.precompress_ramp, profile.period);
  return {base - delta, base + delta};
}

double tendon_tension(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                      double rest_length) {
  return tendon.stiffness * std::max(0.0, tendon_length(positions, tendon) - rest_length);
}

double tendon_tension(const RodState& state, const TendonSpec& tendon, double rest_length) {
  return tendon_tension(state.positions, tendon, rest_length);
}

double tendon_energy(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                     double rest_length) {
  const double stretch = std::max(0.0, tendon_length(positions, tendon) - rest_length);
  return 0.5 * tendon.stiffness * stretch * stretch;
}

RoutePoints routing_point_forces(const Eigen::Matrix2Xd& positions, const TendonSpec& tendon,
                                 double rest_length) {
  const RoutePoints p = routing_points(positions, tendon);
  RoutePoints f = RoutePoints::Zero(2, p.cols());
  double len = 0.0;
  for (Eigen::Index k = 0; k + 1 < p.cols(); ++k) len += (p.col(k + 1) - p.col(k)).norm();
  const double tension = tendon.stiffness * std::max(0.0, len - rest_length);
  if (tension == 0.0) return f;
  for (Eigen::Index k = 0; k + 1 < p.cols(); ++k) {
    const Eigen::Vector2d u = (p.col(k + 1) - p.col(k)).normalized();
    f.col(k) += tension * u;
    f.col(k + 1) -= tension * u;
  }
  return f;
}

void add_tendon_forces(const Eigen::Matrix2Xd& x, const TendonSpec& tendon, double rest_length,
                       Eigen::Matrix2Xd& out) {
  const RoutePoints pull = routing_point_forces(x, tendon, rest_length);
  if (pull.isZero(0.0)) return;
  const int n = static_cast<int>(x.cols());
  for (std::size_t k = 0; k < tendon.routing_nodes.size(); ++k) {
    const int node = tendon.routing_nodes[k];
    const Eigen::Vector2d f = pull.col(k);
    out.col(node) += f;
    // p = x_node + o * R90 (u / |u|) with u = x_b - x_a
    const auto [a, b] = tangent_nodes(node, n);
    const Eigen::Vector2d u = x.col(b) - x.col(a);
    const double len = u.norm();
    const Eigen::Vector2d t = u / len;
    Eigen::Vector2d g(f.y(), -f.x());  // R90^T f
    g = (g - t * t.dot(g)) * (tendon.lateral_offsets[k] / len);
    out.col(b) += g;
    out.col(a) -= g;
  }
}

Eigen::Matrix2Xd tendon_forces(const RodState& state, const TendonSpec& tendon,
                               double rest_length) {
  Eigen::Matrix2Xd f = Eigen::Matrix2Xd::Zero(2, state.positions.cols());
  add_tendon_forces(state.positions, tendon, rest_length, f);
  return f;
}

namespace {

double protocol_energy(const RodState& s, const DiscreteBeam& beam, const TendonPair& tendons,
                       const RestLengths& rest) {
  return elastic_energy(s.positions, beam) + kinetic_energy(s, beam) +
         tendon_energy(s.positions, tendons.left, rest.left) +
         tendon_energy(s.positions, tendons.right, rest.right);
}

double step_bound(const DiscreteBeam& beam, const ActuationOptions& options) {
  const double b = stable_dt(beam);
  return options.dt_cap > 0 ? std::min(b, options.dt_cap) : b;
}

}  // namespace

RodState precompress(const DiscreteBeam& beam, const Environment& env, const TendonPair& tendons,
                     const ActuationProfile& profile, const ActuationOptions& options) {
  profile.validate();
  env.validate(beam.node_count);
  tendons.left.validate(beam);
  tendons.right.validate(beam);

  RodState state = rest_state(beam);
  Perturbation p = seeded_perturbation(beam, options.seed);
  if (options.perturbation_sign) p.sign = *options.perturbation_sign;
  apply_perturbation(state, beam, p);
  for (const auto& [node, pin] : env.fixed_nodes) state.positions.col(node) = pin;

  const double bound = step_bound(beam, options);
  const double dt = options.dt_factor * bound;
  Eigen::Matrix2Xd force(2, beam.node_count), ext(2, beam.node_count);
  const double ramp = profile.precompress_ramp;
  const long ramp_steps = static_cast<long>(std::ceil(ramp / dt));
  for (long k = 0; k < ramp_steps; ++k) {
    const double t = ramp * static_cast<double>(k) / static_cast<double>(ramp_steps);
    const RestLengths rest = command_rest_lengths(profile, beam.length, t);
    ext.setZero();
    add_tendon_forces(state.positions, tendons.left, rest.left, ext);
    add_tendon_forces(state.positions, tendons.right, rest.right, ext);
    if (options.extra_forces) options.extra_forces(state, ext);
    step_in_place(state, beam, env, ext, ramp / static_cast<double>(ramp_steps), bound, force);
  }

  const double hold = beam.length - profile.delta_L;
  const ForceProvider hold_forces = [&](const RodState& s) {
    Eigen::Matrix2Xd f = Eigen::Matrix2Xd::Zero(2, beam.node_count);
    add_tendon_forces(s.positions, tendons.left, hold, f);
    add_tendon_forces(s.positions, tendons.right, hold, f);
    if (options.extra_forces) options.extra_forces(s, f);
    return f;
  };
  SettleOptions so;
  so.dt = dt;
  SettleResult settled =
      settle(std::move(state), beam, env, hold_forces, options.settle_tol, options.settle_max_time, so);
  if (!settled.converged)
    throw SettleTimeout("precompress: beam did not settle within " +
                            std::to_string(options.settle_max_time) + " s",
                        settled.state.time);
  settled.state.time = ramp;
  return settled.state;
}

Trace run_actuated(const DiscreteBeam& beam, const Environment& env, const TendonPair& tendons,
                   const ActuationProfile& profile, const ActuationOptions& options,
                   EnergyAccount* account) {
  if (!(options.sample_rate > 0)) throw ConfigError("run_actuated: sample_rate must be positive");
  RodState state = precompress(beam, env, tendons, profile, options);

  const double bound = step_bound(beam, options);
  const double h = 1.0 / options.sample_rate;
  const long substeps = static_cast<long>(std::ceil(h / (options.dt_factor * bound)));
  const double dt = h / static_cast<double>(substeps);
  const long samples = std::lround(profile.n_cycles * profile.period * options.sample_rate);
  const double t0 = profile.precompress_ramp;

  Trace trace;
  trace.sample_rate = options.sample_rate;
  trace.profile = profile;
  trace.beam_length = beam.length;
  trace.times.reserve(samples + 1);
  trace.tension_left.reserve(samples + 1);
  trace.tension_right.reserve(samples + 1);
  trace.markers.assign(beam.marker_indices.size(), Eigen::Matrix2Xd(2, samples + 1));
  if (options.record_com) trace.com.resize(2, samples + 1);

  auto record = [&](long k) {
    const RestLengths rest = command_rest_lengths(profile, beam.length, state.time);
    trace.times.push_back(state.time);
    trace.tension_left.push_back(tendon_tension(state.positions, tendons.left, rest.left));
    trace.tension_right.push_back(tendon_tension(state.positions, tendons.right, rest.right));
    for (std::size_t m = 0; m < beam.marker_indices.size(); ++m)
      trace.markers[m].col(k) = state.positions.col(beam.marker_indices[m]);
    if (options.record_com) trace.com.col(k) = center_of_mass(state.positions, beam);
    if (options.on_sample) options.on_sample(state, k);
  };

  EnergyAccount acc;
  if (account)
    acc.energy_start = protocol_energy(state, beam, tendons, command_rest_lengths(profile, beam.length, t0));

  Eigen::Matrix2Xd force(2, beam.node_count), ext(2, beam.node_count), extra(2, beam.node_count);
  StepDiagnostics diag;
  record(0);
  for (long k = 1; k <= samples; ++k) {
    for (long s = 0; s < substeps; ++s) {
      const double t = t0 + (static_cast<double>(k - 1) + static_cast<double>(s) / substeps) * h;
      const double t_next = t0 + (static_cast<double>(k - 1) + static_cast<double>(s + 1) / substeps) * h;
      const RestLengths rest = command_rest_lengths(profile, beam.length, t);
      ext.setZero();
      add_tendon_forces(state.positions, tendons.left, rest.left, ext);
      add_tendon_forces(state.positions, tendons.right, rest.right, ext);
      if (options.extra_forces) {
        extra.setZero();
        options.extra_forces(state, extra);
        ext += extra;
      }
      if (account) {
        const RestLengths next = command_rest_lengths(profile, beam.length, t_next);
        // tension at the midpoint rest length, current shape
        const double tl = tendon_tension(state.positions, tendons.left, 0.5 * (rest.left + next.left));
        const double tr = tendon_tension(state.positions, tendons.right, 0.5 * (rest.right + next.right));
        acc.actuator_work -= tl * (next.left - rest.left) + tr * (next.right - rest.right);
        if (options.extra_forces)
          acc.external_work += dt * (extra.array() * state.velocities.array()).sum();
      }
      step_in_place(state, beam, env, ext, dt, bound, force, account ? &diag : nullptr);
      state.time = t_next;
      if (account) acc.dissipated -= diag.damping_power * dt;
    }
    record(k);
  }
  if (account) {
    acc.energy_end = protocol_energy(state, beam, tendons,
                                     command_rest_lengths(profile, beam.length, state.time));
    *account = acc;
  }
  return trace;
}

void ActuationProfile::validate() const {
  if (!(delta_L >= 0)) throw ConfigError("actuation: delta_L must be >= 0");
  if (!(delta_tau > 0)) throw ConfigError("actuation: delta_tau must be > 0");
  if (!(period > 0)) throw ConfigError("actuation: period must be > 0");
  if (n_cycles < 1) throw ConfigError("actuation: n_cycles must be >= 1");
  if (!(precompress_ramp >= 0)) throw ConfigError("actuation: precompress_ramp must be >= 0");
}

void Trace::validate() const {
  const std::size_t n = times.size();
  if (tension_left.size() != n || tension_right.size() != n)
    throw ConfigError("trace: column lengths differ");
  for (const auto& m : markers)
    if (static_cast<std::size_t>(m.cols()) != n) throw ConfigError("trace: marker length differs");
  if (has_com() && static_cast<std::size_t>(com.cols()) != n) throw ConfigError("trace: com length differs");
  for (std::size_t i = 1; i < n; ++i)
    if (!(times[i] > times[i - 1])) throw ConfigError("trace: times must be strictly increasing");
  for (std::size_t i = 0; i < n; ++i)
    if (tension_left[i] < 0 || tension_right[i] < 0) throw ConfigError("trace: negative tension");
}

}  // namespace undulate
