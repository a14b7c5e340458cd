#include "undulate/validation.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "undulate/errors.hpp"

namespace undulate {

BucklingMeasurement measure_buckling(const BeamSpec& spec, int n_segments,
                                     const std::vector<double>& fractions) {
  if (fractions.size() < 2) throw ConfigError("measure_buckling: need at least two shortenings");
  const DiscreteBeam beam = discretize(spec, n_segments);
  const int last = beam.node_count - 1;
  const double L = beam.length;
  const Eigen::Matrix2Xd zero = Eigen::Matrix2Xd::Zero(2, beam.node_count);
  const ForceProvider no_load = [&](const RodState&) { return zero; };

  BucklingMeasurement out;
  RodState state = rest_state(beam);
  for (int i = 0; i <= last; ++i)  // half-sine seed, the first Euler mode
    state.positions(1, i) = 1e-3 * L * std::sin(std::numbers::pi * beam.rest_positions(0, i) / L);
  for (double f : fractions) {
    const double u = f * L;
    Environment env;
    env.global_viscous_damping = 2e-4;
    env.fixed_nodes = {{0, Eigen::Vector2d(0, 0)}, {last, Eigen::Vector2d(L - u, 0)}};
    // squeeze the previous shape affinely onto the new span
    const double span = state.positions(0, last) - state.positions(0, 0);
    state.positions.row(0) *= (L - u) / span;
    state.velocities.setZero();
    SettleResult r = settle(state, beam, env, no_load, 1e-14, 30.0);
    if (!r.converged) throw SettleTimeout("measure_buckling: no equilibrium", r.state.time);
    state = r.state;
    const Eigen::Matrix2Xd f_el = elastic_forces(state.positions, beam);
    out.points.push_back({u, f_el(0, last), state.positions.row(1).cwiseAbs().maxCoeff()});
  }
  // least-squares line through the post-buckling points, intercept at u = 0
  Eigen::MatrixXd A(out.points.size(), 2);
  Eigen::VectorXd b(out.points.size());
  for (std::size_t k = 0; k < out.points.size(); ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = out.points[k].shortening;
    b(k) = out.points[k].force;
  }
  out.critical_force = A.colPivHouseholderQr().solve(b)(0);
  return out;
}

Eigen::Matrix2Xd random_state(const DiscreteBeam& beam, std::uint64_t seed, double noise_fraction) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double h = noise_fraction * beam.segment_rest_lengths.minCoeff();
  Eigen::Matrix2Xd x = beam.rest_positions;
  for (int i = 0; i < x.cols(); ++i) x.col(i) += h * Eigen::Vector2d(unit(rng), unit(rng));
  const double a = std::numbers::pi * unit(rng);
  return Eigen::Rotation2Dd(a).toRotationMatrix() * x;
}

double gradient_check(const DiscreteBeam& beam, int samples, std::uint64_t seed) {
  return gradient_check(beam, samples, seed, [](const Eigen::Matrix2Xd& x, const DiscreteBeam& b) {
    return Eigen::Matrix2Xd(elastic_forces(x, b));
  });
}

double gradient_check(const DiscreteBeam& beam, int samples, std::uint64_t seed,
                      const ForceRoutine& forces) {
  using Long = long double;
  const Long h = 1e-8L * static_cast<Long>(beam.length);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::Matrix2Xd x = random_state(beam, seed + static_cast<std::uint64_t>(s));
    const Eigen::Matrix2Xd f = forces(x, beam);
    Points<Long> xl = x.cast<Long>();
    Eigen::Matrix2Xd fd(2, x.cols());
    for (int i = 0; i < x.cols(); ++i)
      for (int d = 0; d < 2; ++d) {
        const Long keep = xl(d, i);
        xl(d, i) = keep + h;
        const Long up = elastic_energy(xl, beam);
        xl(d, i) = keep - h;
        const Long down = elastic_energy(xl, beam);
        xl(d, i) = keep;
        fd(d, i) = static_cast<double>(-(up - down) / (2 * h));
      }
    worst = std::max(worst, (f - fd).norm() / f.norm());
  }
  return worst;
}

double dissipation_check(const DiscreteBeam& beam, int steps, std::uint64_t seed) {
  RodState state = rest_state(beam);
  state.positions = random_state(beam, seed, 0.05);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < state.velocities.cols(); ++i)
    state.velocities.col(i) = 0.05 * Eigen::Vector2d(unit(rng), unit(rng));
  Environment env;
  env.global_viscous_damping = 1e-3;
  const double bound = stable_dt(beam);
  const double dt = 0.5 * bound;
  const Eigen::Matrix2Xd ext = Eigen::Matrix2Xd::Zero(2, beam.node_count);
  Eigen::Matrix2Xd scratch(2, beam.node_count);
  StepDiagnostics diag;
  step_in_place(state, beam, env, ext, dt, bound, scratch, &diag);
  double previous = diag.staggered_energy;
  const double start = previous;
  double worst_rise = -std::numeric_limits<double>::infinity();
  for (int k = 1; k < steps; ++k) {
    step_in_place(state, beam, env, ext, dt, bound, scratch, &diag);
    worst_rise = std::max(worst_rise, (diag.staggered_energy - previous) / start);
    previous = diag.staggered_energy;
  }
  return worst_rise;
}

double momentum_check(const DiscreteBeam& damped, int steps, std::uint64_t seed) {
  DiscreteBeam beam = damped;
  beam.rayleigh_mass = 0;
  beam.rayleigh_stiffness = 0;
  RodState state = rest_state(beam);
  state.positions = random_state(beam, seed, 0.05);
  std::mt19937_64 rng(seed ^ 0x51afd7ed558ccd1dull);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < state.velocities.cols(); ++i)
    state.velocities.col(i) = Eigen::Vector2d(0.1, 0.05) + 0.05 * Eigen::Vector2d(unit(rng), unit(rng));
  const Environment env;
  const double bound = stable_dt(beam);
  const Eigen::Matrix2Xd ext = Eigen::Matrix2Xd::Zero(2, beam.node_count);
  Eigen::Matrix2Xd scratch(2, beam.node_count);
  const Eigen::Vector2d p0 = linear_momentum(state, beam);
  for (int k = 0; k < steps; ++k) step_in_place(state, beam, env, ext, 0.5 * bound, bound, scratch);
  return (linear_momentum(state, beam) - p0).norm() / p0.norm();
}

std::vector<OracleResult> run_validation() {
  std::vector<OracleResult> out;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };

  {
    const BeamSpec s66 = beam_preset("S_66");
    const BucklingMeasurement m = measure_buckling(s66, kDefaultSegments);
    const double I = second_moment(s66.thickness_a, s66.height);
    const double p_cr = std::numbers::pi * std::numbers::pi * s66.youngs_modulus * I /
                        (s66.length * s66.length);
    const double err = std::abs(m.critical_force - p_cr) / p_cr;
    out.push_back({"euler_buckling", err < 0.05, err, 0.05,
                   "measured " + num(m.critical_force) + " N, analytic " + num(p_cr) + " N"});
  }
  {
    const DiscreteBeam beam = discretize(beam_preset("S_62"));
    const double err = gradient_check(beam, 100, 1);
    out.push_back({"gradient", err < 1e-5, err, 1e-5, "100 random states, central differences"});
  }
  {
    const DiscreteBeam beam = discretize(beam_preset("S_64"), 24);
    const double rise = dissipation_check(beam, 20000, 2);
    out.push_back({"dissipation", rise <= 1e-12, rise, 1e-12,
                   "largest relative step-to-step energy rise"});
  }
  {
    const DiscreteBeam beam = discretize(beam_preset("S_64"), 24);
    const double drift = momentum_check(beam, 1000, 3);
    out.push_back({"momentum", drift < 1e-10, drift, 1e-10, "relative drift over 1000 steps"});
  }
  return out;
}

}  // namespace undulate
