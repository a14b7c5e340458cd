#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "undulate/analysis.hpp"

using namespace undulate;
using doctest::Approx;

namespace {

constexpr double kRate = 100.0;
constexpr double kPeriod = 2.0;
constexpr double kPi = std::numbers::pi;

Eigen::VectorXd sampled(int n, const std::function<double(double)>& f) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = f(i / kRate);
  return v;
}

double tri(double t) {
  const double u = t / kPeriod - std::floor(t / kPeriod);
  return u < 0.25 ? 4 * u : (u < 0.75 ? 2 - 4 * u : 4 * u - 4);
}

// Rising ramp over each period with an instant 50% cliff at the period end.
double sawtooth(double t) {
  const double u = t / kPeriod - std::floor(t / kPeriod);
  return 0.5 + 0.5 * u;
}

using Signal = std::function<double(double)>;

Trace synthetic(const Signal& left, const Signal& right, const std::function<double(int, double)>& marker,
                int cycles = 10) {
  Trace t;
  t.sample_rate = kRate;
  t.profile.period = kPeriod;
  t.profile.n_cycles = cycles;
  t.beam_length = 0.14;
  const int n = static_cast<int>(cycles * kPeriod * kRate) + 1;
  t.markers.assign(8, Eigen::Matrix2Xd(2, n));
  for (int i = 0; i < n; ++i) {
    const double s = i / kRate;
    t.times.push_back(1.0 + s);
    t.tension_left.push_back(left(s));
    t.tension_right.push_back(right(s));
    for (int m = 0; m < 8; ++m) t.markers[m].col(i) = Eigen::Vector2d(0.0175 * (m + 1), marker(m, s));
  }
  t.validate();
  return t;
}

double positive_tri(double t) { return 0.5 * (1 + tri(t)); }

}  // namespace

TEST_CASE("phase of copies, negatives and quarter delays") {
  const int n = 2001;
  const Eigen::VectorXd a = sampled(n, [](double t) { return std::sin(2 * kPi * t / kPeriod) + 0.3 * tri(3 * t); });
  CHECK(phase_shift(a, a, kPeriod, kRate) == Approx(0.0).epsilon(1e-9));
  const Eigen::VectorXd neg = -(a.array() - a.mean());
  CHECK(phase_shift(a, neg, kPeriod, kRate) == Approx(180.0).epsilon(1e-9));
  const Eigen::VectorXd s = sampled(n, [](double t) { return std::sin(2 * kPi * t / kPeriod); });
  const Eigen::VectorXd q = sampled(n, [](double t) { return std::sin(2 * kPi * (t - kPeriod / 4) / kPeriod); });
  CHECK(std::abs(phase_shift(s, q, kPeriod, kRate) - 90.0) <= 2.0);
  CHECK(phase_lag(s, q, kPeriod, kRate) == Approx(90.0).epsilon(0.02));
  CHECK(phase_lag(q, s, kPeriod, kRate) == Approx(-90.0).epsilon(0.02));
}

TEST_CASE("phase of triangle waves between the grid points") {
  const int n = 2001;
  const Eigen::VectorXd a = sampled(n, tri);
  for (double deg : {30.0, 61.3, 135.0, 170.0}) {
    const Eigen::VectorXd b = sampled(n, [&](double t) { return tri(t - deg / 360 * kPeriod); });
    CHECK(std::abs(phase_shift(a, b, kPeriod, kRate) - deg) < 1.0);
  }
}

TEST_CASE("phase is symmetric and affine invariant") {
  const int n = 2001;
  const Eigen::VectorXd a = sampled(n, [](double t) { return std::sin(2 * kPi * t / kPeriod) + 0.2 * std::sin(6 * kPi * t / kPeriod); });
  const Eigen::VectorXd b = sampled(n, [](double t) { return tri(t - 0.37); });
  const double ab = phase_shift(a, b, kPeriod, kRate);
  CHECK(phase_shift(b, a, kPeriod, kRate) == Approx(ab).epsilon(1e-9));
  const Eigen::VectorXd a2 = (3.7 * a.array() + 12.0).matrix();
  const Eigen::VectorXd b2 = (0.01 * b.array() - 4.0).matrix();
  CHECK(phase_shift(a2, b2, kPeriod, kRate) == Approx(ab).epsilon(1e-9));
}

TEST_CASE("phase needs enough data and some variation") {
  const Eigen::VectorXd shortie = sampled(300, tri);
  CHECK_THROWS_AS(phase_shift(shortie, shortie, kPeriod, kRate), AnalysisError);
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(2001, 0.4);
  const Eigen::VectorXd a = sampled(2001, tri);
  CHECK_THROWS_AS(phase_shift(a, flat, kPeriod, kRate), AnalysisError);
}

TEST_CASE("a monotone ramp has no drops") {
  const Eigen::VectorXd up = Eigen::VectorXd::LinSpaced(1000, 0.0, 3.0);
  CHECK(detect_tension_drops(up, kRate).empty());
  const Eigen::VectorXd down = Eigen::VectorXd::LinSpaced(1000, 3.0, 2.0);
  CHECK(detect_tension_drops(down, kRate).empty());
}

TEST_CASE("sawtooth cliffs are found once each") {
  const int n = static_cast<int>(5 * kPeriod * kRate) + 50;
  const Eigen::VectorXd x = sampled(n, sawtooth);
  const auto ev = detect_tension_drops(x, kRate);
  REQUIRE(ev.size() == 5);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(ev[k] - (k + 1) * kPeriod) <= 1.0 / kRate + 1e-12);
  for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k] > ev[k - 1]);
  CHECK(ev.front() >= 0);
  CHECK(ev.back() <= (n - 1) / kRate);
}

TEST_CASE("slow declines and small dips are not drops") {
  // 40% fall spread over 0.4 s, and a 20% dip inside 50 ms
  const Eigen::VectorXd slow = sampled(1000, [](double t) { return t < 5 ? 1.0 : (t < 5.4 ? 1 - (t - 5) : 0.6); });
  CHECK(detect_tension_drops(slow, kRate).empty());
  const Eigen::VectorXd dip = sampled(1000, [](double t) { return (t > 5 && t < 5.03) ? 0.8 : 1.0; });
  CHECK(detect_tension_drops(dip, kRate).empty());
}

TEST_CASE("drop parameters are honoured") {
  const Eigen::VectorXd x = sampled(1000, sawtooth);
  DropParams strict;
  strict.drop_fraction = 0.6;
  CHECK(detect_tension_drops(x, kRate, strict).empty());
}

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == Approx(-1.0));
  CHECK(spearman({1, 2, 3, 4}, {1, 1, 1, 1}) == 0.0);
  CHECK(spearman({1, 2, 3}, {1, 4, 9}) == Approx(1.0));
}

TEST_CASE("standing wave has zero lags and no index") {
  const Trace t = synthetic(positive_tri, [](double s) { return positive_tri(s + 1); },
                            [](int, double s) { return 0.01 * std::sin(2 * kPi * s / kPeriod); });
  const WaveMetrics w = wave_metrics(t, 0.14);
  for (double lag : w.lags_deg) CHECK(std::abs(lag) < 1e-6);
  CHECK(w.traveling_wave_index == 0.0);
}

TEST_CASE("traveling sinusoid") {
  auto wave = [](double shift) {
    return [shift](int m, double s) { return 0.01 * std::sin(2 * kPi * ((s + shift) / kPeriod - 0.1 * m)); };
  };
  const Trace t = synthetic(positive_tri, positive_tri, wave(0.0));
  const WaveMetrics w = wave_metrics(t, 0.14);
  CHECK(w.traveling_wave_index == Approx(1.0));
  for (int m = 0; m < 8; ++m) CHECK(w.lags_deg[m] == Approx(36.0 * m).epsilon(0.01));
  // uniform time shift leaves the index alone
  const Trace shifted = synthetic(positive_tri, positive_tri, wave(0.77));
  CHECK(wave_metrics(shifted, 0.14).traveling_wave_index == Approx(1.0));
}

TEST_CASE("still markers are excluded") {
  const Trace t = synthetic(positive_tri, positive_tri, [](int m, double s) {
    return m == 0 ? 0.0 : 0.01 * std::sin(2 * kPi * (s / kPeriod - 0.05 * m));
  });
  const WaveMetrics w = wave_metrics(t, 0.14);
  CHECK(w.excluded_markers == std::vector<int>{0});
  CHECK(std::isnan(w.lags_deg[0]));
  CHECK(w.traveling_wave_index == Approx(1.0));
}

TEST_CASE("classifier: antiphase without drops is simple bending") {
  const Trace t = synthetic(positive_tri, [](double s) { return positive_tri(s + 1); },
                            [](int, double s) { return 0.01 * tri(s); });
  const RegimeReport r = classify_regime(t);
  CHECK(r.label == Regime::TypeI);
  CHECK(r.phase_shift_deg == Approx(180.0).epsilon(0.01));
  CHECK(r.drop_events_left.empty());
  CHECK(r.drop_events_right.empty());
  CHECK(r.peak_ratio == Approx(1.0).epsilon(1e-6));
  CHECK(r.marker_phase_lags_deg.size() == 8);
}

TEST_CASE("classifier: unequal peaks are buckling with bending") {
  const Trace t = synthetic([](double s) { return 2 * positive_tri(s); }, [](double s) { return positive_tri(s + 1); },
                            [](int, double s) { return 0.01 * tri(s); });
  const RegimeReport r = classify_regime(t);
  CHECK(r.label == Regime::TypeII);
  CHECK(r.peak_ratio == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("classifier: drops on one side only are buckling with bending") {
  const Trace t = synthetic(sawtooth, [](double s) { return 0.5 + 0.5 * positive_tri(s + 1); },
                            [](int, double s) { return 0.01 * tri(s); });
  const RegimeReport r = classify_regime(t);
  CHECK(r.label == Regime::TypeII);
  CHECK(!r.drop_events_left.empty());
  CHECK(r.drop_events_right.empty());
}

TEST_CASE("classifier: drops on both sides out of antiphase are a traveling wave") {
  const Trace t = synthetic(sawtooth, [](double s) { return sawtooth(s + 0.6); },
                            [](int m, double s) { return 0.01 * std::sin(2 * kPi * (s / kPeriod - 0.1 * m)); });
  const RegimeReport r = classify_regime(t);
  CHECK(r.label == Regime::TypeIII);
  CHECK(r.phase_shift_deg < 170);
  CHECK(r.drop_events_left.size() == 9);
  CHECK(r.drop_events_right.size() == 9);
  // event times are protocol times inside the trace
  for (double e : r.drop_events_left) CHECK((e >= t.times.front() && e <= t.times.back()));
}

TEST_CASE("classifier thresholds move the boundaries") {
  const Trace t = synthetic(sawtooth, [](double s) { return sawtooth(s + 0.6); },
                            [](int, double s) { return 0.01 * tri(s); });
  ClassifierThresholds th;
  th.phase_cut_deg = 60;
  CHECK(classify_regime(t, th).label == Regime::TypeI);
  th = {};
  th.drops.drop_fraction = 0.9;
  CHECK(classify_regime(t, th).label == Regime::TypeI);
}

TEST_CASE("classifier: a dead tendon") {
  const Trace t = synthetic(positive_tri, [](double) { return 0.0; }, [](int, double s) { return 0.01 * tri(s); });
  const RegimeReport r = classify_regime(t);
  CHECK(r.label == Regime::TypeII);
  CHECK(std::isinf(r.peak_ratio));
  CHECK(r.phase_shift_deg == 180.0);
}

TEST_CASE("classifier refuses traces that are too short") {
  const Trace t = synthetic(positive_tri, positive_tri, [](int, double s) { return 0.01 * tri(s); }, 2);
  CHECK_THROWS_AS(classify_regime(t), AnalysisError);
}

TEST_CASE("regime names round trip") {
  for (Regime r : {Regime::TypeI, Regime::TypeII, Regime::TypeIII}) CHECK(regime_from_string(to_string(r)) == r);
  CHECK_THROWS_AS(regime_from_string("TypeIV"), ConfigError);
}
