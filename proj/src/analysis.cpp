#include "undulate/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace undulate {

namespace {

void check_periodic_input(Eigen::Index na, Eigen::Index nb, double period, double sample_rate) {
  if (na != nb) throw AnalysisError("phase: signals differ in length");
  if (!(period > 0) || !(sample_rate > 0)) throw AnalysisError("phase: period and rate must be positive");
  if (static_cast<double>(na) < 3.0 * period * sample_rate)
    throw AnalysisError("phase: signals must cover at least three periods");
}

}  // namespace

double correlation_lag(const Eigen::Ref<const Eigen::VectorXd>& a,
                       const Eigen::Ref<const Eigen::VectorXd>& b, int max_lag) {
  const Eigen::Index n = a.size();
  if (b.size() != n) throw AnalysisError("correlation_lag: length mismatch");
  auto flat = [](const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double range = v.maxCoeff() - v.minCoeff();
    return !(range > 1e-12 * v.cwiseAbs().maxCoeff());
  };
  if (flat(a) || flat(b)) throw AnalysisError("correlation_lag: constant signal, phase undefined");
  max_lag = std::min<int>(max_lag, static_cast<int>(n) - 2);

  std::vector<double> corr(2 * max_lag + 1, -2.0);
  for (int lag = -max_lag; lag <= max_lag; ++lag) {
    const Eigen::Index start = std::max(0, -lag);
    const Eigen::Index len = n - std::abs(lag);
    const auto x = a.segment(start, len).array();
    const auto y = b.segment(start + lag, len).array();
    const double sxx = (x - x.mean()).square().sum();
    const double syy = (y - y.mean()).square().sum();
    if (sxx > 0 && syy > 0)
      corr[lag + max_lag] = ((x - x.mean()) * (y - y.mean())).sum() / std::sqrt(sxx * syy);
  }
  const auto best = std::max_element(corr.begin(), corr.end());
  const int k = static_cast<int>(best - corr.begin());
  double lag = k - max_lag;
  if (k > 0 && k + 1 < static_cast<int>(corr.size())) {
    const double c0 = corr[k - 1], c1 = corr[k], c2 = corr[k + 1];
    const double curv = c0 - 2.0 * c1 + c2;
    if (curv < 0) lag += 0.5 * (c0 - c2) / curv;
  }
  return lag;
}

double phase_lag(const Eigen::Ref<const Eigen::VectorXd>& a,
                 const Eigen::Ref<const Eigen::VectorXd>& b, double period, double sample_rate) {
  check_periodic_input(a.size(), b.size(), period, sample_rate);
  const double samples_per_period = period * sample_rate;
  const int max_lag = static_cast<int>(std::floor(samples_per_period / 2.0));
  double deg = 360.0 * correlation_lag(a, b, max_lag) / samples_per_period;
  if (deg <= -180.0) deg += 360.0;
  if (deg > 180.0) deg -= 360.0;
  return deg;
}

double phase_shift(const Eigen::Ref<const Eigen::VectorXd>& a,
                   const Eigen::Ref<const Eigen::VectorXd>& b, double period, double sample_rate) {
  return std::clamp(std::abs(phase_lag(a, b, period, sample_rate)), 0.0, 180.0);
}

std::vector<double> detect_tension_drops(const Eigen::Ref<const Eigen::VectorXd>& x,
                                         double sample_rate, const DropParams& p) {
  std::vector<double> events;
  const Eigen::Index n = x.size();
  if (n < 10) throw AnalysisError("detect_tension_drops: need at least 10 samples");
  const int window = std::max(1, static_cast<int>(std::lround(p.drop_window * sample_rate)));
  const int peak_window = std::max(window, static_cast<int>(std::lround(p.peak_window * sample_rate)));
  const int refractory = static_cast<int>(std::ceil(p.refractory * sample_rate - 1e-9));
  Eigen::Index last = -refractory - 1;
  for (Eigen::Index i = 1; i < n; ++i) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, i - window);
    const double recent = x.segment(lo, i - lo + 1).maxCoeff();
    const Eigen::Index plo = std::max<Eigen::Index>(0, i - peak_window);
    const double peak = x.segment(plo, i - plo + 1).maxCoeff();
    if (!(peak > 0)) continue;
    if (recent - x[i] >= p.drop_fraction * peak && i - last >= refractory) {
      events.push_back(static_cast<double>(i) / sample_rate);
      last = i;
    }
  }
  return events;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::TypeI: return "TypeI";
    case Regime::TypeII: return "TypeII";
    case Regime::TypeIII: return "TypeIII";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "TypeI") return Regime::TypeI;
  if (s == "TypeII") return Regime::TypeII;
  if (s == "TypeIII") return Regime::TypeIII;
  throw ConfigError("unknown regime label '" + s + "'");
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const Eigen::Map<const Eigen::VectorXd> ex(rx.data(), rx.size()), ey(ry.data(), ry.size());
  const Eigen::VectorXd cx = ex.array() - ex.mean();
  const Eigen::VectorXd cy = ey.array() - ey.mean();
  const double den = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
  return den > 0 ? cx.dot(cy) / den : 0.0;
}

namespace {

struct Window {
  Eigen::Index start = 0;
  Eigen::Index length = 0;
  double cycles = 0.0;
};

Window analysis_window(const Trace& trace, double skip_cycles, int min_cycles) {
  const double period = trace.profile.period;
  const double per = period * trace.sample_rate;
  const double cycles = static_cast<double>(trace.size()) / per;
  if (cycles + 1e-9 < min_cycles)
    throw AnalysisError("trace covers " + std::to_string(cycles) + " cycles, need " +
                        std::to_string(min_cycles));
  Window w;
  w.length = static_cast<Eigen::Index>(trace.size());
  if (cycles - skip_cycles + 1e-9 >= min_cycles) {
    w.start = static_cast<Eigen::Index>(std::lround(skip_cycles * per));
    w.length -= w.start;
  }
  w.cycles = static_cast<double>(w.length) / per;
  return w;
}

Eigen::VectorXd column(const std::vector<double>& v, const Window& w) {
  return Eigen::Map<const Eigen::VectorXd>(v.data() + w.start, w.length);
}

}  // namespace

WaveMetrics wave_metrics(const Trace& trace, double beam_length, double skip_cycles) {
  if (trace.markers.size() < 4) throw AnalysisError("wave_metrics: need at least 4 markers");
  const Window w = analysis_window(trace, skip_cycles, 3);
  const double period = trace.profile.period;

  WaveMetrics out;
  out.lags_deg.assign(trace.markers.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<Eigen::VectorXd> signals;
  int reference = -1;
  for (std::size_t m = 0; m < trace.markers.size(); ++m) {
    Eigen::VectorXd y = trace.markers[m].row(1).segment(w.start, w.length).transpose();
    signals.push_back(y);
    const double amplitude = 0.5 * (y.maxCoeff() - y.minCoeff());
    if (amplitude < 1e-5 * beam_length)
      out.excluded_markers.push_back(static_cast<int>(m));
    else if (reference < 0)
      reference = static_cast<int>(m);
  }
  if (reference < 0) return out;

  std::vector<double> order, lags;
  double previous = 0.0;
  for (std::size_t m = reference; m < trace.markers.size(); ++m) {
    if (std::find(out.excluded_markers.begin(), out.excluded_markers.end(), static_cast<int>(m)) !=
        out.excluded_markers.end())
      continue;
    double lag = phase_lag(signals[reference], signals[m], period, trace.sample_rate);
    // unwrap along the body
    while (lag - previous > 180.0) lag -= 360.0;
    while (lag - previous <= -180.0) lag += 360.0;
    previous = lag;
    out.lags_deg[m] = lag;
    order.push_back(static_cast<double>(m));
    lags.push_back(lag);
  }
  out.traveling_wave_index = spearman(order, lags);
  return out;
}

RegimeReport classify_regime(const Trace& trace, const ClassifierThresholds& th) {
  const Window w = analysis_window(trace, th.skip_cycles, th.min_cycles);
  const double period = trace.profile.period;
  const Eigen::VectorXd left = column(trace.tension_left, w);
  const Eigen::VectorXd right = column(trace.tension_right, w);

  RegimeReport r;
  const double t0 = trace.times.empty() ? 0.0 : trace.times[w.start];
  for (double t : detect_tension_drops(left, trace.sample_rate, th.drops)) r.drop_events_left.push_back(t0 + t);
  for (double t : detect_tension_drops(right, trace.sample_rate, th.drops)) r.drop_events_right.push_back(t0 + t);

  const double peak_l = left.maxCoeff(), peak_r = right.maxCoeff();
  const double hi = std::max(peak_l, peak_r), lo = std::min(peak_l, peak_r);
  r.peak_ratio = hi <= 0 ? 1.0 : (lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());

  // A tendon that never loads has no defined phase; treat it as antiphase.
  const bool both_loaded = (left.maxCoeff() > left.minCoeff()) && (right.maxCoeff() > right.minCoeff());
  r.phase_shift_deg = both_loaded ? phase_shift(left, right, period, trace.sample_rate) : 180.0;

  if (trace.markers.size() >= 4) {
    r.marker_phase_lags_deg = wave_metrics(trace, trace.beam_length, th.skip_cycles).lags_deg;
  }

  const double need = th.drops_per_cycle * w.cycles;
  const bool drops_l = static_cast<double>(r.drop_events_left.size()) >= need && !r.drop_events_left.empty();
  const bool drops_r = static_cast<double>(r.drop_events_right.size()) >= need && !r.drop_events_right.empty();

  if (drops_l && drops_r && r.phase_shift_deg < th.phase_cut_deg && r.peak_ratio <= th.peak_ratio_equal)
    r.label = Regime::TypeIII;
  else if (r.peak_ratio >= th.peak_ratio_unequal || drops_l != drops_r)
    r.label = Regime::TypeII;
  else
    r.label = Regime::TypeI;
  return r;
}

}  // namespace undulate
