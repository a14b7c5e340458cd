#include "undulate/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "undulate/errors.hpp"

namespace undulate {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> expected_columns(std::size_t markers, bool com) {
  std::vector<std::string> cols{"time_s", "tension_left_N", "tension_right_N"};
  for (std::size_t m = 0; m < markers; ++m) {
    cols.push_back("m" + std::to_string(m) + "_x");
    cols.push_back("m" + std::to_string(m) + "_y");
  }
  if (com) {
    cols.emplace_back("com_x");
    cols.emplace_back("com_y");
  }
  return cols;
}

// NaN and infinities are written by name so the reader can reject them explicitly.
nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string header_line(const Provenance& p) {
  return "# config_hash=" + p.config_hash + " seed=" + std::to_string(p.seed);
}

void write_trace_csv(std::ostream& out, const Trace& trace, const Provenance& p) {
  trace.validate();
  out << header_line(p) << '\n';
  const auto cols = expected_columns(trace.markers.size(), trace.has_com());
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << format_number(trace.times[k]) << ',' << format_number(trace.tension_left[k]) << ','
        << format_number(trace.tension_right[k]);
    for (const auto& m : trace.markers)
      out << ',' << format_number(m(0, k)) << ',' << format_number(m(1, k));
    if (trace.has_com()) out << ',' << format_number(trace.com(0, k)) << ',' << format_number(trace.com(1, k));
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const Trace& trace, const Provenance& p) {
  std::ostringstream os;
  write_trace_csv(os, trace, p);
  write_text(path, os.str());
}

LoadedTrace read_trace_csv(std::istream& in, const std::string& source) {
  LoadedTrace out;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty file");
  {
    char hash[64] = {0};
    std::uint64_t seed = 0;
    if (std::sscanf(line.c_str(), "# config_hash=%63s seed=%" SCNu64, hash, &seed) != 2)
      throw ConfigError(source + ":1: header must read '# config_hash=<hex> seed=<int>'");
    out.provenance = {hash, seed};
  }
  if (!std::getline(in, line)) throw ConfigError(source + ":2: missing column header");
  const auto cols = split(line);
  if (cols.size() < 3 || (cols.size() - 3) % 2 != 0)
    throw ConfigError(source + ":2: unexpected column count " + std::to_string(cols.size()));
  const bool com = cols.size() >= 5 && cols[cols.size() - 2] == "com_x";
  const std::size_t markers = (cols.size() - 3) / 2 - (com ? 1 : 0);
  const auto want = expected_columns(markers, com);
  for (std::size_t c = 0; c < want.size(); ++c)
    if (cols[c] != want[c])
      throw ConfigError(source + ":2: column " + std::to_string(c + 1) + " is '" + cols[c] +
                        "', expected '" + want[c] + "'");

  std::vector<std::vector<double>> data(cols.size());
  long lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != cols.size())
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(cols.size()) + " fields, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (cells[c].empty() || *end != '\0' || !std::isfinite(v))
        throw ConfigError(source + ":" + std::to_string(lineno) + ": column '" + cols[c] +
                          "' holds '" + cells[c] + "', not a finite number");
      data[c].push_back(v);
    }
  }
  const std::size_t n = data[0].size();
  if (n < 2) throw ConfigError(source + ": need at least two samples");

  Trace& t = out.trace;
  t.times = data[0];
  t.tension_left = data[1];
  t.tension_right = data[2];
  for (std::size_t m = 0; m < markers; ++m) {
    Eigen::Matrix2Xd block(2, n);
    for (std::size_t k = 0; k < n; ++k) block.col(k) << data[3 + 2 * m][k], data[4 + 2 * m][k];
    t.markers.push_back(std::move(block));
  }
  if (com) {
    t.com.resize(2, n);
    for (std::size_t k = 0; k < n; ++k) t.com.col(k) << data[cols.size() - 2][k], data[cols.size() - 1][k];
  }
  t.sample_rate = static_cast<double>(n - 1) / (t.times.back() - t.times.front());
  if (!(t.sample_rate > 0)) throw ConfigError(source + ": time_s must increase");
  // round away the 9-digit quantisation of the time column
  const double rounded = std::round(t.sample_rate * 1e6) / 1e6;
  if (std::abs(rounded - t.sample_rate) < 1e-6 * t.sample_rate) t.sample_rate = rounded;
  t.validate();
  return out;
}

LoadedTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  return read_trace_csv(in, path);
}

std::string report_json(const RegimeReport& r, const Provenance& p) {
  nlohmann::ordered_json j;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  j["label"] = to_string(r.label);
  j["phase_shift_deg"] = number_or_null(r.phase_shift_deg);
  j["drop_events_left"] = r.drop_events_left;
  j["drop_events_right"] = r.drop_events_right;
  j["peak_ratio"] = number_or_null(r.peak_ratio);
  auto lags = nlohmann::json::array();
  for (double v : r.marker_phase_lags_deg) lags.push_back(number_or_null(v));
  j["marker_phase_lags_deg"] = lags;
  return j.dump(2) + "\n";
}

std::string locomotion_json(const LocomotionResult& r, double limit_cycle_err, const Provenance& p) {
  nlohmann::ordered_json j;
  j["config_hash"] = p.config_hash;
  j["seed"] = p.seed;
  j["heading"] = {r.heading.x(), r.heading.y()};
  j["net_displacement"] = r.net_displacement;
  j["mean_speed"] = r.mean_speed;
  j["stride_displacement"] = r.stride_displacement;
  j["cycle_displacements"] = r.cycle_displacements;
  j["limit_cycle_error"] = number_or_null(limit_cycle_err);
  j["samples"] = r.com_trajectory.cols();
  return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path + ": cannot write file");
  out << text;
  if (!out) throw ConfigError(path + ": write failed");
}

}  // namespace undulate
