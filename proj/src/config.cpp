#include "undulate/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "undulate/errors.hpp"

namespace undulate {

namespace {

constexpr double kMm = 1e-3;

std::string where(const std::string& source, const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

// Walks one mapping, hands each known key to its handler and rejects the rest.
class Section {
 public:
  Section(const YAML::Node& node, std::string name, const std::string& source)
      : node_(node), name_(std::move(name)), source_(source) {
    if (!node_.IsMap()) fail(node_, "section '" + name_ + "' must be a mapping");
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    throw ConfigError(where(source_, at) + ": " + msg);
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) const { return node_[key]; }

  double number(const std::string& key, double fallback, bool required = false) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) {
      if (required) fail(node_, "missing required field '" + name_ + "." + key + "'");
      return fallback;
    }
    return as_number(n, key);
  }

  double as_number(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "field '" + name_ + "." + key + "' must be a number");
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) fail(n, "field '" + name_ + "." + key + "' must be finite");
      return v;
    } catch (const YAML::BadConversion&) {
      fail(n, "field '" + name_ + "." + key + "' must be a number, got '" + n.Scalar() + "'");
    }
  }

  long long integer(const std::string& key, long long fallback) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    try {
      if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
      return n.as<long long>();
    } catch (const YAML::BadConversion&) {
      fail(n, "field '" + name_ + "." + key + "' must be an integer");
    }
  }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(n, "field '" + name_ + "." + key + "' must be a string");
    return n.Scalar();
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    if (!n.IsSequence()) fail(n, "field '" + name_ + "." + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : n) out.push_back(as_number(item, key));
    return out;
  }

  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) {
    seen_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) return fallback;
    if (!n.IsSequence()) fail(n, "field '" + name_ + "." + key + "' must be a list");
    std::vector<std::string> out;
    for (const auto& item : n) {
      if (!item.IsScalar()) fail(item, "entries of '" + name_ + "." + key + "' must be strings");
      out.push_back(item.Scalar());
    }
    return out;
  }

  void mark(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string key = kv.first.Scalar();
      if (!seen_.count(key)) fail(kv.first, "unknown field '" + (name_.empty() ? key : name_ + "." + key) + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::string source_;
  std::set<std::string> seen_;
};

YAML::Node load(const std::string& text, const std::string& source) {
  try {
    YAML::Node root = YAML::Load(text);
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    return root;
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void with_section(Section& top, const std::string& key, const std::string& source, bool required,
                  Fn&& fn) {
  top.mark(key);
  if (!top.has(key)) {
    if (required) throw ConfigError(source + ": missing required section '" + key + "'");
    return;
  }
  Section s(top.get(key), key, source);
  fn(s);
  s.finish();
}

void parse_beam(Section& s, RunConfig& c) {
  const std::string preset = s.text("preset", "");
  const bool from_preset = !preset.empty();
  if (from_preset) {
    if (!is_beam_preset(preset)) s.fail(s.get("preset"), "unknown beam preset '" + preset + "'");
    c.beam = beam_preset(preset);
    c.beam_id = preset;
  } else {
    c.beam = BeamSpec{};
    c.beam_id = "custom";
  }
  BeamSpec& b = c.beam;
  b.length = s.number("length_L", b.length / kMm, !from_preset) * kMm;
  b.height = s.number("height_H", b.height / kMm, !from_preset) * kMm;
  b.thickness_a = s.number("thickness_dA", b.thickness_a / kMm, !from_preset) * kMm;
  b.thickness_b = s.number("thickness_dB", b.thickness_b / kMm, !from_preset) * kMm;
  const std::string taper = s.text("taper", "Linear");
  if (taper != "Linear") s.fail(s.get("taper"), "unsupported taper '" + taper + "'");
  b.youngs_modulus = s.number("youngs_modulus", b.youngs_modulus);
  b.density = s.number("density", b.density);
  const auto rd = s.numbers("rayleigh_damping", {b.rayleigh_mass, b.rayleigh_stiffness});
  if (rd.size() != 2) s.fail(s.get("rayleigh_damping"), "rayleigh_damping needs [mass, stiffness]");
  b.rayleigh_mass = rd[0];
  b.rayleigh_stiffness = rd[1];
  if (from_preset) {
    const BeamSpec ref = beam_preset(preset);
    auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::abs(y); };
    if (!same(b.length, ref.length) || !same(b.height, ref.height) ||
        !same(b.thickness_a, ref.thickness_a) || !same(b.thickness_b, ref.thickness_b))
      c.beam_id = preset + "_custom";
  }
}

void parse_actuation(Section& s, ActuationProfile& a) {
  a.delta_L = s.number("delta_L", 0, true) * kMm;
  a.delta_tau = s.number("delta_tau", 0, true) * kMm;
  const std::string w = s.text("waveform", "Triangle");
  if (w == "Triangle")
    a.waveform = Waveform::Triangle;
  else if (w == "Sine")
    a.waveform = Waveform::Sine;
  else
    s.fail(s.get("waveform"), "waveform must be Triangle or Sine");
  a.period = s.number("period", a.period);
  a.n_cycles = static_cast<int>(s.integer("n_cycles", a.n_cycles));
  a.precompress_ramp = s.number("precompress_ramp", a.precompress_ramp);
}

void parse_ground(Section& s, GroundModel& g) {
  const std::string mode = s.text("mode", "AnisotropicViscous");
  if (mode == "AnisotropicViscous")
    g.mode = FrictionMode::AnisotropicViscous;
  else if (mode == "AnisotropicCoulomb")
    g.mode = FrictionMode::AnisotropicCoulomb;
  else
    s.fail(s.get("mode"), "mode must be AnisotropicViscous or AnisotropicCoulomb");
  g.c_longitudinal = s.number("c_longitudinal", g.c_longitudinal);
  g.c_lateral = s.number("c_lateral", g.c_lateral);
  g.coulomb_normal_load = s.number("coulomb_normal_load", g.coulomb_normal_load);
  g.mu_longitudinal = s.number("mu_longitudinal", g.mu_longitudinal);
  g.mu_lateral = s.number("mu_lateral", g.mu_lateral);
  g.velocity_scale = s.number("velocity_scale", g.velocity_scale);
}

void parse_classifier(Section& s, ClassifierThresholds& t) {
  t.phase_cut_deg = s.number("phase_cut_deg", t.phase_cut_deg);
  t.peak_ratio_equal = s.number("peak_ratio_equal", t.peak_ratio_equal);
  t.peak_ratio_unequal = s.number("peak_ratio_unequal", t.peak_ratio_unequal);
  t.drops_per_cycle = s.number("drops_per_cycle", t.drops_per_cycle);
  t.skip_cycles = s.number("skip_cycles", t.skip_cycles);
  t.min_cycles = static_cast<int>(s.integer("min_cycles", t.min_cycles));
  t.drops.drop_fraction = s.number("drop_fraction", t.drops.drop_fraction);
  t.drops.drop_window = s.number("drop_window", t.drops.drop_window);
  t.drops.refractory = s.number("refractory", t.drops.refractory);
  t.drops.peak_window = s.number("peak_window", t.drops.peak_window);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string render(const RunConfig& c, bool for_hash) {
  const BeamSpec& b = c.beam;
  const ActuationProfile& a = c.actuation;
  const GroundModel& g = c.ground;
  const ClassifierThresholds& t = c.thresholds;
  std::ostringstream os;
  os << "beam:\n";
  if (is_beam_preset(c.beam_id)) os << "  preset: " << c.beam_id << "\n";
  os << "  length_L: " << fmt(b.length / kMm) << "\n"
     << "  height_H: " << fmt(b.height / kMm) << "\n"
     << "  thickness_dA: " << fmt(b.thickness_a / kMm) << "\n"
     << "  thickness_dB: " << fmt(b.thickness_b / kMm) << "\n"
     << "  taper: Linear\n"
     << "  youngs_modulus: " << fmt(b.youngs_modulus) << "\n"
     << "  density: " << fmt(b.density) << "\n"
     << "  rayleigh_damping: [" << fmt(b.rayleigh_mass) << ", " << fmt(b.rayleigh_stiffness) << "]\n"
     << "tendon:\n  stiffness: " << fmt(c.tendon_stiffness) << "\n"
     << "actuation:\n"
     << "  delta_L: " << fmt(a.delta_L / kMm) << "\n"
     << "  delta_tau: " << fmt(a.delta_tau / kMm) << "\n"
     << "  waveform: " << (a.waveform == Waveform::Triangle ? "Triangle" : "Sine") << "\n"
     << "  period: " << fmt(a.period) << "\n"
     << "  n_cycles: " << a.n_cycles << "\n"
     << "  precompress_ramp: " << fmt(a.precompress_ramp) << "\n"
     << "solver:\n"
     << "  dt_factor: " << fmt(c.dt_factor) << "\n"
     << "  global_viscous_damping: " << fmt(c.global_viscous_damping) << "\n";
  if (!for_hash) os << "  seed: " << c.seed << "\n";
  os << "  n_segments: " << c.n_segments << "\n"
     << "ground:\n"
     << "  mode: " << (g.mode == FrictionMode::AnisotropicViscous ? "AnisotropicViscous" : "AnisotropicCoulomb") << "\n"
     << "  c_longitudinal: " << fmt(g.c_longitudinal) << "\n"
     << "  c_lateral: " << fmt(g.c_lateral) << "\n"
     << "  coulomb_normal_load: " << fmt(g.coulomb_normal_load) << "\n"
     << "  mu_longitudinal: " << fmt(g.mu_longitudinal) << "\n"
     << "  mu_lateral: " << fmt(g.mu_lateral) << "\n"
     << "  velocity_scale: " << fmt(g.velocity_scale) << "\n"
     << "output:\n";
  if (!for_hash) os << "  directory: \"" << c.output_directory << "\"\n";
  os << "  sample_rate: " << fmt(c.sample_rate) << "\n"
     << "classifier:\n"
     << "  phase_cut_deg: " << fmt(t.phase_cut_deg) << "\n"
     << "  peak_ratio_equal: " << fmt(t.peak_ratio_equal) << "\n"
     << "  peak_ratio_unequal: " << fmt(t.peak_ratio_unequal) << "\n"
     << "  drops_per_cycle: " << fmt(t.drops_per_cycle) << "\n"
     << "  skip_cycles: " << fmt(t.skip_cycles) << "\n"
     << "  min_cycles: " << t.min_cycles << "\n"
     << "  drop_fraction: " << fmt(t.drops.drop_fraction) << "\n"
     << "  drop_window: " << fmt(t.drops.drop_window) << "\n"
     << "  refractory: " << fmt(t.drops.refractory) << "\n"
     << "  peak_window: " << fmt(t.drops.peak_window) << "\n";
  return os.str();
}

}  // namespace

void RunConfig::validate() const {
  beam.validate();
  actuation.validate();
  ground.validate();
  if (!(tendon_stiffness > 0)) throw ConfigError("tendon.stiffness must be > 0");
  if (!(dt_factor > 0 && dt_factor < 1)) throw ConfigError("solver.dt_factor must be in (0, 1)");
  if (!(global_viscous_damping >= 0)) throw ConfigError("solver.global_viscous_damping must be >= 0");
  if (n_segments < 8) throw ConfigError("solver.n_segments must be >= 8");
  if (!(sample_rate > 0)) throw ConfigError("output.sample_rate must be > 0");
  if (output_directory.empty()) throw ConfigError("output.directory must not be empty");
  if (!(thresholds.peak_ratio_unequal >= thresholds.peak_ratio_equal))
    throw ConfigError("classifier: peak_ratio_unequal must be >= peak_ratio_equal");
  if (thresholds.min_cycles < 1) throw ConfigError("classifier.min_cycles must be >= 1");
}

void SweepPlan::validate() const {
  if (beams.empty()) throw ConfigError("sweep: beams must not be empty");
  for (const auto& b : beams)
    if (!is_beam_preset(b)) throw ConfigError("sweep: unknown beam '" + b + "'");
  if (delta_L_list.empty() || delta_tau_list.empty())
    throw ConfigError("sweep: delta_L_list and delta_tau_list must not be empty");
  for (double v : delta_L_list)
    if (!(v >= 0)) throw ConfigError("sweep: delta_L values must be >= 0");
  for (double v : delta_tau_list)
    if (!(v > 0)) throw ConfigError("sweep: delta_tau values must be > 0");
  if (repetitions < 1) throw ConfigError("sweep: repetitions must be >= 1");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  const YAML::Node root = load(text, source);
  Section top(root, "", source);
  RunConfig c;
  with_section(top, "beam", source, true, [&](Section& s) { parse_beam(s, c); });
  with_section(top, "tendon", source, false,
               [&](Section& s) { c.tendon_stiffness = s.number("stiffness", c.tendon_stiffness); });
  with_section(top, "actuation", source, true, [&](Section& s) { parse_actuation(s, c.actuation); });
  with_section(top, "solver", source, false, [&](Section& s) {
    c.dt_factor = s.number("dt_factor", c.dt_factor);
    c.global_viscous_damping = s.number("global_viscous_damping", c.global_viscous_damping);
    const long long seed = s.integer("seed", 0);
    if (seed < 0) s.fail(s.get("seed"), "solver.seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    c.n_segments = static_cast<int>(s.integer("n_segments", c.n_segments));
  });
  with_section(top, "ground", source, false, [&](Section& s) { parse_ground(s, c.ground); });
  with_section(top, "output", source, false, [&](Section& s) {
    c.output_directory = s.text("directory", c.output_directory);
    c.sample_rate = s.number("sample_rate", c.sample_rate);
  });
  with_section(top, "classifier", source, false, [&](Section& s) { parse_classifier(s, c.thresholds); });
  top.finish();
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) { return parse_run_config(read_file(path), path); }

SweepPlan parse_sweep_plan(const std::string& text, const std::string& source) {
  const YAML::Node root = load(text, source);
  Section top(root, "", source);
  SweepPlan p;
  p.beams = top.texts("beams", p.beams);
  p.delta_L_list = top.numbers("delta_L_list", p.delta_L_list);
  p.delta_tau_list = top.numbers("delta_tau_list", p.delta_tau_list);
  p.repetitions = static_cast<int>(top.integer("repetitions", p.repetitions));
  top.finish();
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return p;
}

SweepPlan load_sweep_plan(const std::string& path) { return parse_sweep_plan(read_file(path), path); }

std::string to_yaml(const RunConfig& config) { return render(config, false); }

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : render(config, true)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace undulate
