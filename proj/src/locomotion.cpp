#include "undulate/locomotion.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "undulate/errors.hpp"

namespace undulate {

void GroundModel::validate() const {
  if (!(c_longitudinal >= 0)) throw ConfigError("ground: c_longitudinal must be >= 0");
  if (!(c_lateral >= c_longitudinal))
    throw ConfigError("ground: c_lateral must be >= c_longitudinal");
  if (!(mu_longitudinal >= 0)) throw ConfigError("ground: mu_longitudinal must be >= 0");
  if (!(mu_lateral >= mu_longitudinal))
    throw ConfigError("ground: mu_lateral must be >= mu_longitudinal");
  if (!(coulomb_normal_load >= 0)) throw ConfigError("ground: coulomb_normal_load must be >= 0");
  if (!(velocity_scale > 0)) throw ConfigError("ground: velocity_scale must be > 0");
}

double GroundModel::max_damping_rate(const DiscreteBeam& beam) const {
  const double m = beam.node_masses.minCoeff();
  if (mode == FrictionMode::AnisotropicViscous) return c_lateral / m;
  // tanh(v/s) has slope 1/s at the origin
  return mu_lateral * coulomb_normal_load / (velocity_scale * m);
}

Eigen::Matrix2Xd node_tangents(const Eigen::Matrix2Xd& x) {
  const Eigen::Index n = x.cols();
  Eigen::Matrix2Xd t(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index a = std::max<Eigen::Index>(i - 1, 0);
    const Eigen::Index b = std::min<Eigen::Index>(i + 1, n - 1);
    t.col(i) = (x.col(b) - x.col(a)).normalized();
  }
  return t;
}

void add_friction_forces(const Eigen::Matrix2Xd& x, const Eigen::Matrix2Xd& v,
                         const GroundModel& ground, Eigen::Matrix2Xd& out) {
  const Eigen::Matrix2Xd t = node_tangents(x);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const Eigen::Vector2d ti = t.col(i);
    const Eigen::Vector2d ni(-ti.y(), ti.x());
    const double vt = v.col(i).dot(ti);
    const double vn = v.col(i).dot(ni);
    if (ground.mode == FrictionMode::AnisotropicViscous) {
      out.col(i) -= ground.c_longitudinal * vt * ti + ground.c_lateral * vn * ni;
    } else {
      const double load = ground.coulomb_normal_load;
      const double s = ground.velocity_scale;
      out.col(i) -= ground.mu_longitudinal * load * std::tanh(vt / s) * ti +
                    ground.mu_lateral * load * std::tanh(vn / s) * ni;
    }
  }
}

Eigen::Matrix2Xd friction_forces(const RodState& state, const GroundModel& ground) {
  Eigen::Matrix2Xd f = Eigen::Matrix2Xd::Zero(2, state.positions.cols());
  add_friction_forces(state.positions, state.velocities, ground, f);
  return f;
}

LocomotionRun simulate_locomotion(const DiscreteBeam& beam, const TendonPair& tendons,
                                  const ActuationProfile& profile, const GroundModel& ground,
                                  double duration, const ActuationOptions& options) {
  ground.validate();
  profile.validate();
  if (!(duration >= 5 * profile.period - 1e-9))
    throw ConfigError("locomotion: duration must cover at least 5 actuation periods");
  if (!(options.sample_rate > 0)) throw ConfigError("locomotion: sample_rate must be positive");

  ActuationProfile drive = profile;
  drive.n_cycles = std::max(5, static_cast<int>(std::lround(duration / profile.period)));
  const long per_cycle = std::lround(profile.period * options.sample_rate);
  if (per_cycle < 1) throw ConfigError("locomotion: sample_rate too low for the period");

  Environment env;  // free floating, the ground supplies all external drag

  LocomotionResult result;
  ActuationOptions opt = options;
  opt.record_com = true;
  const double cap = 1.0 / ground.max_damping_rate(beam);
  opt.dt_cap = options.dt_cap > 0 ? std::min(options.dt_cap, cap) : cap;
  opt.extra_forces = [&ground, user = options.extra_forces](const RodState& s, Eigen::Matrix2Xd& f) {
    add_friction_forces(s.positions, s.velocities, ground, f);
    if (user) user(s, f);
  };
  opt.on_sample = [&result, per_cycle, user = options.on_sample](const RodState& s, long k) {
    if (k % per_cycle == 0) result.cycle_shapes.push_back(s.positions);
    if (user) user(s, k);
  };

  LocomotionRun run;
  run.trace = run_actuated(beam, env, tendons, drive, opt);

  const Eigen::Vector2d a = beam.rest_positions.col(0);
  const Eigen::Vector2d b = beam.rest_positions.col(beam.node_count - 1);
  result.heading = (a - b).normalized();
  result.com_trajectory = run.trace.com;
  const Eigen::Index last = result.com_trajectory.cols() - 1;
  result.net_displacement =
      result.heading.dot(result.com_trajectory.col(last) - result.com_trajectory.col(0));
  const double elapsed = run.trace.times.back() - run.trace.times.front();
  result.mean_speed = elapsed > 0 ? result.net_displacement / elapsed : 0.0;
  result.stride_displacement = result.net_displacement / drive.n_cycles;
  for (int c = 0; c < drive.n_cycles; ++c) {
    const Eigen::Index i0 = c * per_cycle, i1 = std::min<Eigen::Index>((c + 1) * per_cycle, last);
    result.cycle_displacements.push_back(
        result.heading.dot(result.com_trajectory.col(i1) - result.com_trajectory.col(i0)));
  }
  run.result = std::move(result);
  return run;
}

double aligned_rms_distance(const Eigen::Matrix2Xd& a, const Eigen::Matrix2Xd& b) {
  if (a.cols() != b.cols() || a.cols() < 2)
    throw ConfigError("aligned_rms_distance: shapes must have the same node count >= 2");
  const Eigen::Matrix3d T = Eigen::umeyama(a, b, false);
  const Eigen::Matrix2Xd moved = (T.topLeftCorner<2, 2>() * a).colwise() + T.topRightCorner<2, 1>();
  return std::sqrt((moved - b).colwise().squaredNorm().mean());
}

double limit_cycle_error(const LocomotionResult& result, int skip_cycles) {
  const auto& shapes = result.cycle_shapes;
  if (static_cast<int>(shapes.size()) < skip_cycles + 2)
    throw AnalysisError("limit_cycle_error: not enough cycles after the transient");
  double worst = 0.0;
  for (std::size_t c = skip_cycles; c + 1 < shapes.size(); ++c)
    worst = std::max(worst, aligned_rms_distance(shapes[c], shapes[c + 1]));
  return worst;
}

}  // namespace undulate
