// Cross-module properties that need whole simulations.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "undulate/locomotion.hpp"
#include "undulate/tendon.hpp"
#include "undulate/validation.hpp"

using namespace undulate;
using doctest::Approx;

namespace {

ActuationProfile drive(double dl_mm, double dtau_mm, int cycles) {
  ActuationProfile p;
  p.delta_L = dl_mm * 1e-3;
  p.delta_tau = dtau_mm * 1e-3;
  p.n_cycles = cycles;
  return p;
}

double max_abs(const Eigen::Matrix2Xd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("elastic and tendon forces rotate with the body") {
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const TendonPair pair = make_tendons(b);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Matrix2Xd x = random_state(b, seed, 0.3);
    const double alpha = 0.3 + 0.4 * static_cast<double>(seed);
    const Eigen::Matrix2d R = Eigen::Rotation2Dd(alpha).toRotationMatrix();
    const Eigen::Matrix2Xd f = elastic_forces(x, b);
    CHECK(max_abs(elastic_forces(Eigen::Matrix2Xd(R * x), b) - R * f) <= 1e-12 * max_abs(f));
    const double rest = tendon_length(x, pair.left) - 1e-3;
    const Eigen::Matrix2Xd ft = tendon_forces(RodState{0, x, {}}, pair.left, rest);
    const Eigen::Matrix2Xd ftr = tendon_forces(RodState{0, R * x, {}}, pair.left, rest);
    CHECK(max_abs(ftr - R * ft) <= 1e-12 * max_abs(ft));
  }
}

TEST_CASE("a step commutes with rotation") {
  const DiscreteBeam b = discretize(beam_preset("S_62"));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.02);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RodState s = rest_state(b);
    s.positions = random_state(b, seed, 0.1);
    Eigen::Matrix2Xd ext(2, b.node_count);
    for (int i = 0; i < b.node_count; ++i) {
      s.velocities.col(i) = Eigen::Vector2d(g(rng), g(rng));
      ext.col(i) = Eigen::Vector2d(g(rng), g(rng));
    }
    Environment env;
    env.global_viscous_damping = 1e-3;
    const double dt = 0.5 * stable_dt(b);
    const Eigen::Matrix2d R = Eigen::Rotation2Dd(1.1 + static_cast<double>(seed)).toRotationMatrix();
    RodState r = s;
    r.positions = R * s.positions;
    r.velocities = R * s.velocities;
    const RodState a = step(s, b, env, ext, dt);
    const RodState c = step(r, b, env, R * ext, dt);
    CHECK(max_abs(c.positions - R * a.positions) <= 1e-12 * max_abs(a.positions));
    CHECK(max_abs(c.velocities - R * a.velocities) <= 1e-12 * max_abs(a.velocities));
  }
}

TEST_CASE("swapping tendons and reflecting the perturbation mirrors the trace") {
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const TendonPair pair = make_tendons(b);
  const TendonPair swapped{pair.right, pair.left};
  const Environment env = clamped_at_a(b, kBenchViscousDamping);
  const ActuationProfile p = drive(10, 35, 3);
  ActuationOptions up, down;
  up.perturbation_sign = 1.0;
  down.perturbation_sign = -1.0;
  const Trace a = run_actuated(b, env, pair, p, up);
  const Trace m = run_actuated(b, env, swapped, p, down);
  REQUIRE(a.size() == m.size());
  double worst_t = 0, worst_y = 0, worst_x = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    // the tendon now on the other side receives the same command
    worst_t = std::max({worst_t, std::abs(a.tension_left[i] - m.tension_left[i]),
                        std::abs(a.tension_right[i] - m.tension_right[i])});
    for (std::size_t k = 0; k < a.markers.size(); ++k) {
      worst_y = std::max(worst_y, std::abs(a.markers[k](1, i) + m.markers[k](1, i)));
      worst_x = std::max(worst_x, std::abs(a.markers[k](0, i) - m.markers[k](0, i)));
    }
  }
  CHECK(worst_t < 1e-9);
  CHECK(worst_y < 1e-9);
  CHECK(worst_x < 1e-9);
}

TEST_CASE("tendons never push") {
  const DiscreteBeam b = discretize(beam_preset("S_62"));
  const Trace t = run_actuated(b, clamped_at_a(b, kBenchViscousDamping), make_tendons(b), drive(15, 40, 3));
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(t.tension_left[i] >= 0.0);
    CHECK(t.tension_right[i] >= 0.0);
  }
}

TEST_CASE("actuator work covers stored energy and damping losses") {
  for (const char* id : {"S_64", "S_66"}) {
    const DiscreteBeam b = discretize(beam_preset(id));
    EnergyAccount acc;
    run_actuated(b, clamped_at_a(b, kBenchViscousDamping), make_tendons(b), drive(10, 35, 3), {}, &acc);
    const double gained = acc.energy_end - acc.energy_start;
    const double needed = gained + acc.dissipated;
    MESSAGE(std::string(id) << ": work " << acc.actuator_work << " J, gained " << gained << " J, dissipated "
               << acc.dissipated << " J");
    CHECK(acc.actuator_work > 0);
    CHECK(acc.dissipated > 0);
    CHECK(acc.actuator_work >= needed - 0.02 * std::abs(acc.actuator_work));
  }
}

TEST_CASE("damped rod from random states never gains energy") {
  for (std::uint64_t seed : {2u, 9u, 31u}) {
    const DiscreteBeam b = discretize(beam_preset("S_64"), 24);
    CHECK(dissipation_check(b, 5000, seed) <= 1e-12);
  }
}

TEST_CASE("driven robot settles into a limit cycle") {
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const ActuationProfile p = drive(10, 35, 10);
  const LocomotionRun r = simulate_locomotion(b, make_tendons(b), p, GroundModel{}, 10 * p.period);
  const double err = limit_cycle_error(r.result, 3);
  MESSAGE("limit cycle error " << err << " m");
  CHECK(err < 0.02 * b.length);
  for (std::size_t i = 0; i + 1 < r.result.cycle_shapes.size(); ++i)
    CHECK(r.result.cycle_shapes[i].allFinite());
}

TEST_CASE("friction stays passive along a driven run") {
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const GroundModel ground;
  const ActuationProfile p = drive(10, 35, 5);
  ActuationOptions opt;
  int violations = 0;
  long checked = 0;
  opt.on_sample = [&](const RodState& s, long) {
    const Eigen::Matrix2Xd f = friction_forces(s, ground);
    for (int i = 0; i < s.node_count(); ++i) {
      violations += f.col(i).dot(s.velocities.col(i)) > 0.0;
      ++checked;
    }
  };
  simulate_locomotion(b, make_tendons(b), p, ground, 5 * p.period, opt);
  CHECK(checked > 0);
  CHECK(violations == 0);
}

TEST_CASE("more lateral grip never slows the robot down") {
  // per-cycle travel over c_lat / c_long in {1, 5, 10, 20}, 5% slack
  const DiscreteBeam b = discretize(beam_preset("S_64"));
  const ActuationProfile p = drive(10, 35, 10);
  double previous = -1e9;
  for (double ratio : {1.0, 5.0, 10.0, 20.0}) {
    GroundModel g;
    g.c_lateral = ratio * g.c_longitudinal;
    const LocomotionRun r = simulate_locomotion(b, make_tendons(b), p, g, 10 * p.period);
    const double stride = r.result.stride_displacement;
    MESSAGE("ratio " << ratio << ": " << stride * 1e3 << " mm per cycle");
    CHECK(stride >= previous - 0.05 * std::abs(previous));
    previous = stride;
  }
}
