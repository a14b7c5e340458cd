#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "undulate/analysis.hpp"
#include "undulate/locomotion.hpp"
#include "undulate/trace.hpp"

namespace undulate {

/// Reproducibility stamp carried by every persisted artifact.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// `# config_hash=<hex> seed=<int>`
std::string header_line(const Provenance& p);

/// Trace CSV: header comment, then time_s,tension_left_N,tension_right_N,
/// m0_x,m0_y,...[,com_x,com_y], 9 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace, const Provenance& p);
void write_trace_csv(const std::string& path, const Trace& trace, const Provenance& p);

struct LoadedTrace {
  Trace trace;
  Provenance provenance;
};

/// Parses the schema back; the sample rate is inferred from the time column.
/// Schema problems throw ConfigError naming the offending column or line.
LoadedTrace read_trace_csv(std::istream& in, const std::string& source = "<trace>");
LoadedTrace read_trace_csv(const std::string& path);

std::string report_json(const RegimeReport& report, const Provenance& p);
std::string locomotion_json(const LocomotionResult& result, double limit_cycle_err,
                            const Provenance& p);

/// %.9g, the number format of every CSV artifact.
std::string format_number(double v);

void write_text(const std::string& path, const std::string& text);

}  // namespace undulate
