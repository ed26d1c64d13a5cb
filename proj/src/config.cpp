#include "opo/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"
#include "opo/errors.hpp"

namespace opo::config {
namespace {

using nlohmann::json;

class Section {
public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items())
      if (!allowed.count(key)) throw SchemaError(path_ + ": unknown key '" + key + "'");
  }

  bool has(const char* key) const { return node_.contains(key); }

  Section child(const char* key) const {
    if (!has(key)) fail(std::string("missing section '") + key + "'");
    return Section(node_.at(key), path_ + "." + key);
  }

  double number(const char* key) const {
    if (!has(key)) fail(std::string("missing key '") + key + "'");
    const json& v = node_.at(key);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    return v.get<double>();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::optional<double> optional_number(const char* key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  std::size_t count_or(const char* key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_unsigned()) fail(std::string("'") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  }

  bool flag_or(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail(std::string("'") + key + "' must be true or false");
    return v.get<bool>();
  }

  std::string string(const char* key) const {
    const json& v = node_.at(key);
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key) const {
    const json& v = node_.at(key);
    if (!v.is_array()) fail(std::string("'") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(std::string("'") + key + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> strings(const char* key) const {
    const json& v = node_.at(key);
    if (!v.is_array()) fail(std::string("'") + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(std::string("'") + key + "' must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& message) const { throw SchemaError(path_ + ": " + message); }

private:
  const json& node_;
  std::string path_;
};

// Model invariants surface as std::invalid_argument; in a config they are
// schema problems of the section being parsed.
template <class F>
auto checked(const Section& s, F&& make) {
  try {
    return make();
  } catch (const std::invalid_argument& e) {
    s.fail(e.what());
  }
}

ModeParams parse_mode(const Section& s) {
  s.allow({"gamma1_hz", "gamma2_hz", "gamma_int_hz"});
  return checked(s, [&] {
    return ModeParams::from_hz(s.number("gamma1_hz"), s.number("gamma2_hz"), s.number("gamma_int_hz"));
  });
}

SystemParams parse_system(const Section& s) {
  s.allow({"signal", "pump", "g_hz", "pump_wavelength_m", "pump_frequency_hz", "coupling_efficiency"});
  const ModeParams signal = parse_mode(s.child("signal"));
  const ModeParams pump = parse_mode(s.child("pump"));
  if (s.has("pump_wavelength_m") == s.has("pump_frequency_hz"))
    s.fail("exactly one of 'pump_wavelength_m' and 'pump_frequency_hz' is required");
  double omega = 0.0;
  if (s.has("pump_wavelength_m")) {
    const double lambda = s.number("pump_wavelength_m");
    if (!(lambda > 0.0)) s.fail("'pump_wavelength_m' must be > 0");
    omega = 2.0 * kPi * kSpeedOfLight / lambda;
  } else {
    omega = hz_to_angular(s.number("pump_frequency_hz"));
  }
  return checked(s, [&] {
    return SystemParams(signal, pump, hz_to_angular(s.number("g_hz")), omega,
                        s.number_or("coupling_efficiency", 1.0));
  });
}

DetectionChain parse_detection(const Section& s) {
  s.allow({"eta", "visibility"});
  return checked(s, [&] { return DetectionChain(s.number_or("eta", 1.0), s.number_or("visibility", 1.0)); });
}

Quadrature parse_quadrature(const Section& s, const char* key) {
  if (!s.has(key)) return Quadrature::squeezed;
  const std::string q = s.string(key);
  if (q == "squeezed") return Quadrature::squeezed;
  if (q == "anti_squeezed") return Quadrature::anti_squeezed;
  s.fail(std::string("'") + key + "' must be \"squeezed\" or \"anti_squeezed\"");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config: ") + e.what());
  }
  const Section root(doc, "config");
  root.allow({"seed", "system", "detection", "operating_point", "spectrum", "trace", "attenuation",
              "threshold_sweep", "squeezing_sweep", "constraints", "fit"});

  RunConfig cfg;
  if (root.has("seed")) {
    if (!doc.at("seed").is_number_unsigned()) root.fail("'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (root.has("system")) cfg.system = parse_system(root.child("system"));
  if (root.has("detection")) cfg.detection = parse_detection(root.child("detection"));

  if (root.has("operating_point")) {
    const Section s = root.child("operating_point");
    s.allow({"incident_pump_power_w", "sideband_frequency_hz"});
    cfg.operating_point = checked(s, [&] {
      return OperatingPoint(s.number("incident_pump_power_w"), s.number("sideband_frequency_hz"));
    });
  }

  if (root.has("spectrum")) {
    const Section s = root.child("spectrum");
    s.allow({"freq_start_hz", "freq_stop_hz", "n_points", "log_spacing"});
    SpectrumSection sp;
    sp.freq_start_hz = s.number_or("freq_start_hz", sp.freq_start_hz);
    sp.freq_stop_hz = s.number_or("freq_stop_hz", sp.freq_stop_hz);
    sp.n_points = s.count_or("n_points", sp.n_points);
    sp.log_spacing = s.flag_or("log_spacing", sp.log_spacing);
    if (!(sp.freq_start_hz >= 0.0) || !(sp.freq_stop_hz >= sp.freq_start_hz))
      s.fail("need 0 <= freq_start_hz <= freq_stop_hz");
    if (sp.n_points < 1) s.fail("'n_points' must be >= 1");
    if (sp.log_spacing && sp.freq_start_hz == 0.0) s.fail("log spacing needs freq_start_hz > 0");
    cfg.spectrum = sp;
  }

  if (root.has("trace")) {
    const Section s = root.child("trace");
    s.allow({"n_points", "samples_per_point", "phase_start_rad", "phase_stop_rad",
             "squeezing_angle_rad", "dark_noise_variance", "var_sq_db", "var_asq_db"});
    TraceSection t;
    t.n_points = s.count_or("n_points", t.n_points);
    t.samples_per_point = s.count_or("samples_per_point", t.samples_per_point);
    t.phase_start_rad = s.number_or("phase_start_rad", t.phase_start_rad);
    t.phase_stop_rad = s.number_or("phase_stop_rad", t.phase_stop_rad);
    t.squeezing_angle_rad = s.number_or("squeezing_angle_rad", t.squeezing_angle_rad);
    t.dark_noise_variance = s.number_or("dark_noise_variance", t.dark_noise_variance);
    t.var_sq_db = s.optional_number("var_sq_db");
    t.var_asq_db = s.optional_number("var_asq_db");
    if (t.var_sq_db.has_value() != t.var_asq_db.has_value())
      s.fail("'var_sq_db' and 'var_asq_db' must be given together");
    if (t.n_points < 2) s.fail("'n_points' must be >= 2");
    if (t.samples_per_point < 2) s.fail("'samples_per_point' must be >= 2");
    if (!(t.dark_noise_variance >= 0.0)) s.fail("'dark_noise_variance' must be >= 0");
    cfg.trace = t;
  }

  if (root.has("attenuation")) {
    const Section s = root.child("attenuation");
    s.allow({"transmissions"});
    AttenuationSection a;
    a.transmissions = s.numbers("transmissions");
    for (double t : a.transmissions)
      if (!(t >= 0.0 && t <= 1.0)) s.fail("transmissions must lie in [0, 1]");
    cfg.attenuation = a;
  }

  if (root.has("threshold_sweep")) {
    const Section s = root.child("threshold_sweep");
    s.allow({"power_max_w", "n_points", "relative_noise"});
    ThresholdSweepSection t;
    t.power_max_w = s.number("power_max_w");
    t.n_points = s.count_or("n_points", t.n_points);
    t.relative_noise = s.number_or("relative_noise", t.relative_noise);
    if (!(t.power_max_w > 0.0)) s.fail("'power_max_w' must be > 0");
    if (t.n_points < 3) s.fail("'n_points' must be >= 3");
    if (!(t.relative_noise >= 0.0)) s.fail("'relative_noise' must be >= 0");
    cfg.threshold_sweep = t;
  }

  if (root.has("squeezing_sweep")) {
    const Section s = root.child("squeezing_sweep");
    s.allow({"pump_ratio_min", "pump_ratio_max", "n_points", "noise_db", "quadrature"});
    SqueezingSweepSection q;
    q.pump_ratio_min = s.number_or("pump_ratio_min", q.pump_ratio_min);
    q.pump_ratio_max = s.number_or("pump_ratio_max", q.pump_ratio_max);
    q.n_points = s.count_or("n_points", q.n_points);
    q.noise_db = s.number_or("noise_db", q.noise_db);
    q.quadrature = parse_quadrature(s, "quadrature");
    if (!(q.pump_ratio_min >= 0.0) || !(q.pump_ratio_max > q.pump_ratio_min))
      s.fail("need 0 <= pump_ratio_min < pump_ratio_max");
    if (q.n_points < 2) s.fail("'n_points' must be >= 2");
    if (!(q.noise_db >= 0.0)) s.fail("'noise_db' must be >= 0");
    cfg.squeezing_sweep = q;
  }

  if (root.has("constraints")) {
    const Section s = root.child("constraints");
    s.allow({"gamma_int_hz", "gamma1_min_hz", "gamma1_max_hz", "gamma2_min_hz", "gamma2_max_hz",
             "max_cooperativity", "sideband_frequency_hz", "equal_coupling", "grid_points"});
    DesignSection d;
    d.constraints.gamma_int = hz_to_angular(s.number("gamma_int_hz"));
    d.constraints.gamma1_range = {hz_to_angular(s.number("gamma1_min_hz")),
                                  hz_to_angular(s.number("gamma1_max_hz"))};
    d.constraints.gamma2_range = {hz_to_angular(s.number("gamma2_min_hz")),
                                  hz_to_angular(s.number("gamma2_max_hz"))};
    d.constraints.max_cooperativity =
        s.number_or("max_cooperativity", std::numeric_limits<double>::infinity());
    d.constraints.sideband_frequency = s.number("sideband_frequency_hz");
    d.constraints.equal_coupling = s.flag_or("equal_coupling", false);
    d.constraints.detection = cfg.detection;
    d.grid_points = s.count_or("grid_points", d.grid_points);
    if (d.grid_points < 2) s.fail("'grid_points' must be >= 2");
    cfg.design = d;
  }

  if (root.has("fit")) {
    const Section s = root.child("fit");
    s.allow({"input", "calibration", "free", "quadrature", "sideband_frequency_hz", "window", "max_iterations"});
    FitSection f;
    if (s.has("input")) f.input = resolve(base_dir, s.string("input"));
    if (s.has("calibration")) f.calibration = resolve(base_dir, s.string("calibration"));
    if (s.has("free")) {
      f.fit_efficiency = f.fit_coupling_ratio = f.fit_linewidth = false;
      for (const auto& name : s.strings("free")) {
        if (name == "efficiency") f.fit_efficiency = true;
        else if (name == "coupling_ratio") f.fit_coupling_ratio = true;
        else if (name == "Gamma") f.fit_linewidth = true;
        else s.fail("unknown free parameter '" + name + "' (efficiency, coupling_ratio, Gamma)");
      }
    }
    f.quadrature = parse_quadrature(s, "quadrature");
    f.sideband_frequency_hz = s.optional_number("sideband_frequency_hz");
    f.window = s.count_or("window", f.window);
    if (s.has("max_iterations")) f.max_iterations = s.count_or("max_iterations", 0);
    cfg.fit = f;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace opo::config
