#include "icas/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "icas/simulate.hpp"

namespace icas {

using nlohmann::json;

std::string_view to_string(Scenario s) {
  return s == Scenario::MicroDoppler ? "micro-doppler" : "vna-sweep";
}

namespace {

Scenario parse_scenario(const std::string &text, const std::string &path) {
  if (text == "micro-doppler") return Scenario::MicroDoppler;
  if (text == "vna-sweep" || text == "flyover") return Scenario::VnaSweep;
  throw ConfigError(path, "unknown scenario '" + text + "' (micro-doppler, flyover or vna-sweep)");
}

std::string join(const std::string &path, const std::string &key) {
  return path.empty() ? key : path + "." + key;
}

void check_object(const json &j, const std::string &path, std::initializer_list<const char *> keys) {
  if (!j.is_object()) {
    throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  }
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError(join(path, item.key()), "unknown key");
    }
  }
}

double as_double(const json &j, const std::string &path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

std::size_t as_count(const json &j, const std::string &path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) throw ConfigError(path, "expected a non-negative integer");
  if (j.is_number_integer() && j.get<std::int64_t>() < 0) throw ConfigError(path, "must be >= 0");
  return j.get<std::size_t>();
}

template <typename T, typename F>
void read(const json &obj, const std::string &path, const char *key, T &out, F convert) {
  if (obj.contains(key)) out = convert(obj.at(key), join(path, key));
}

void read_double(const json &o, const std::string &p, const char *k, double &out) { read(o, p, k, out, as_double); }
void read_count(const json &o, const std::string &p, const char *k, std::size_t &out) { read(o, p, k, out, as_count); }

Vec3 as_vec3(const json &j, const std::string &path) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(path, "expected [x, y, z]");
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]"), as_double(j[2], path + "[2]")};
}

cd as_complex(const json &j, const std::string &path) {
  if (j.is_number()) return {as_double(j, path), 0.0};
  if (!j.is_array() || j.size() != 2) throw ConfigError(path, "expected a number or [re, im]");
  return {as_double(j[0], path + "[0]"), as_double(j[1], path + "[1]")};
}

PolarimetricCoeff as_coeff(const json &j, const std::string &path) {
  if (!j.is_object()) return PolarimetricCoeff::scalar(as_complex(j, path));
  check_object(j, path, {"hh", "hv", "vh", "vv"});
  PolarimetricCoeff c;
  const char *names[] = {"hh", "hv", "vh", "vv"};
  for (std::size_t i = 0; i < 4; ++i) {
    if (j.contains(names[i])) c.m[i] = as_complex(j.at(names[i]), join(path, names[i]));
  }
  return c;
}

Window as_window(const json &j, const std::string &path) {
  if (!j.is_string()) throw ConfigError(path, "expected \"rect\" or \"hann\"");
  try {
    return parse_window(j.get<std::string>());
  } catch (const std::invalid_argument &e) {
    throw ConfigError(path, e.what());
  }
}

std::vector<PointScatterer> as_points(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<PointScatterer> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    check_object(j[i], p, {"position_m", "velocity_mps", "coeff"});
    PointScatterer s;
    if (!j[i].contains("position_m")) throw ConfigError(join(p, "position_m"), "required");
    s.position = as_vec3(j[i].at("position_m"), join(p, "position_m"));
    read(j[i], p, "velocity_mps", s.velocity, as_vec3);
    read(j[i], p, "coeff", s.coeff, as_coeff);
    out.push_back(s);
  }
  return out;
}

std::vector<Propeller> as_propellers(const json &j, const std::string &path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array");
  std::vector<Propeller> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json &o = j[i];
    check_object(o, p, {"center_m", "axis", "n_blades", "radius_m", "f_rot_hz", "phase0_rad",
                        "points_per_blade", "coeff"});
    Propeller prop;
    read(o, p, "center_m", prop.center, as_vec3);
    read(o, p, "axis", prop.axis, as_vec3);
    std::size_t blades = static_cast<std::size_t>(prop.n_blades);
    std::size_t ppb = static_cast<std::size_t>(prop.points_per_blade);
    read_count(o, p, "n_blades", blades);
    read_count(o, p, "points_per_blade", ppb);
    prop.n_blades = static_cast<int>(blades);
    prop.points_per_blade = static_cast<int>(ppb);
    read_double(o, p, "radius_m", prop.radius_m);
    read_double(o, p, "f_rot_hz", prop.f_rot_hz);
    read_double(o, p, "phase0_rad", prop.phase0_rad);
    if (o.contains("coeff")) {
      prop.coeff = as_coeff(o.at("coeff"), join(p, "coeff"));
    } else {
      prop.coeff = PolarimetricCoeff::scalar(1.0 / static_cast<double>(std::max<std::size_t>(ppb, 1)));
    }
    if (o.contains("axis")) {
      const double n = norm(prop.axis);
      if (!(n > 0.0)) throw ConfigError(join(p, "axis"), "must be non-zero");
      if (std::abs(n - 1.0) > 1e-12) prop.axis = prop.axis / n;
    }
    out.push_back(prop);
  }
  return out;
}

Scene as_scene(const json &j, const std::string &path) {
  check_object(j, path, {"static_scatterers", "propellers", "background_scatterers", "reciprocal"});
  Scene s;
  read(j, path, "static_scatterers", s.static_scatterers, as_points);
  read(j, path, "propellers", s.propellers, as_propellers);
  read(j, path, "background_scatterers", s.background_scatterers, as_points);
  if (j.contains("reciprocal")) {
    if (!j.at("reciprocal").is_boolean()) throw ConfigError(join(path, "reciprocal"), "expected true or false");
    s.reciprocal = j.at("reciprocal").get<bool>();
  }
  return s;
}

json complex_json(cd v) { return json::array({v.real(), v.imag()}); }
json vec_json(const Vec3 &v) { return json::array({v.x, v.y, v.z}); }

json coeff_json(const PolarimetricCoeff &c) {
  return {{"hh", complex_json(c.m[0])}, {"hv", complex_json(c.m[1])},
          {"vh", complex_json(c.m[2])}, {"vv", complex_json(c.m[3])}};
}

json points_json(const std::vector<PointScatterer> &pts) {
  json a = json::array();
  for (const auto &s : pts) {
    a.push_back({{"position_m", vec_json(s.position)},
                 {"velocity_mps", vec_json(s.velocity)},
                 {"coeff", coeff_json(s.coeff)}});
  }
  return a;
}

json to_json(const RunConfig &c) {
  json props = json::array();
  for (const auto &p : c.scene.propellers) {
    props.push_back({{"center_m", vec_json(p.center)},
                     {"axis", vec_json(p.axis)},
                     {"n_blades", p.n_blades},
                     {"radius_m", p.radius_m},
                     {"f_rot_hz", p.f_rot_hz},
                     {"phase0_rad", p.phase0_rad},
                     {"points_per_blade", p.points_per_blade},
                     {"coeff", coeff_json(p.coeff)}});
  }
  json gate = {{"width_s", c.refl.gate.width_s}, {"taper", c.refl.gate.taper}};
  gate["center_s"] = c.refl.gate.center_s ? json(*c.refl.gate.center_s) : json(nullptr);
  return {
      {"scenario", std::string(to_string(c.scenario))},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"noise_sigma", c.noise_sigma},
      {"ofdm",
       {{"center_freq_hz", c.ofdm.center_freq_hz},
        {"bandwidth_hz", c.ofdm.bandwidth_hz},
        {"n_carriers", c.ofdm.n_carriers},
        {"n_active", c.ofdm.n_active},
        {"symbol_duration_s", c.ofdm.symbol_duration_s},
        {"pilot_stride", c.ofdm.pilot_stride},
        {"subsample_factor", c.ofdm.subsample_factor}}},
      {"scene",
       {{"static_scatterers", points_json(c.scene.static_scatterers)},
        {"propellers", props},
        {"background_scatterers", points_json(c.scene.background_scatterers)},
        {"reciprocal", c.scene.reciprocal}}},
      {"geometry",
       {{"beta_deg", c.geometry.beta_deg},
        {"range_m", c.geometry.range_m},
        {"beta_list_deg", c.geometry.beta_list_deg}}},
      {"md",
       {{"n_symbols", c.md.n_symbols},
        {"subsample", c.md.subsample},
        {"n_fft", c.md.n_fft},
        {"window", std::string(to_string(c.md.window))},
        {"threshold_db", c.md.threshold_db},
        {"spectrogram_frame", c.md.spectrogram_frame},
        {"spectrogram_overlap", c.md.spectrogram_overlap},
        {"spectrogram_window", std::string(to_string(c.md.spectrogram_window))}}},
      {"vna",
       {{"f_start_hz", c.vna.f_start_hz},
        {"f_stop_hz", c.vna.f_stop_hz},
        {"n_freqs", c.vna.n_freqs},
        {"beta_start_deg", c.vna.beta_start_deg},
        {"beta_step_deg", c.vna.beta_step_deg},
        {"beta_stop_deg", c.vna.beta_stop_deg},
        {"range_m", c.vna.range_m},
        {"bg_drift", c.vna.bg_drift},
        {"turntable_deg", c.vna.turntable_deg},
        {"system_response_file", c.vna.system_response_file}}},
      {"refl",
       {{"gate", gate},
        {"display_f_min_hz", c.refl.display_f_min_hz},
        {"display_f_max_hz", c.refl.display_f_max_hz}}},
  };
}

} // namespace

std::vector<double> RunConfig::md_betas() const {
  return geometry.beta_list_deg.empty() ? std::vector<double>{geometry.beta_deg} : geometry.beta_list_deg;
}

std::vector<double> RunConfig::vna_betas() const {
  return stepped_grid(vna.beta_start_deg, vna.beta_step_deg, vna.beta_stop_deg);
}

void RunConfig::validate() const {
  try {
    ofdm.validate();
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
  try {
    scene.validate();
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    const auto colon = msg.find(": ");
    if (colon != std::string::npos && msg.find(' ') > colon) {
      throw ConfigError("scene." + msg.substr(0, colon), msg.substr(colon + 2));
    }
    throw ConfigError("scene", msg);
  }
  try {
    refl.gate.validate();
  } catch (const std::invalid_argument &e) {
    const std::string msg = e.what();
    throw ConfigError("refl." + msg.substr(0, msg.find(':')), msg.substr(msg.find(':') + 2));
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be >= 0");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

  if (scenario == Scenario::MicroDoppler) {
    for (std::size_t i = 0; i < md_betas().size(); ++i) {
      const double b = md_betas()[i];
      if (!(b >= 0.0 && b <= 180.0)) {
        throw ConfigError(geometry.beta_list_deg.empty() ? "geometry.beta_deg"
                                                         : "geometry.beta_list_deg[" + std::to_string(i) + "]",
                          "must lie in [0, 180]");
      }
    }
    if (!(geometry.range_m > 0.0)) throw ConfigError("geometry.range_m", "must be > 0");
    if (md.n_symbols < 1) throw ConfigError("md.n_symbols", "must be >= 1");
    if (md.subsample < 1) throw ConfigError("md.subsample", "must be >= 1");
    if (md.n_fft != 0 && md.n_fft < md.n_symbols) throw ConfigError("md.n_fft", "must be 0 or >= md.n_symbols");
    if (md.spectrogram_frame < 1 || md.spectrogram_frame > md.n_symbols) {
      throw ConfigError("md.spectrogram_frame", "must lie in [1, md.n_symbols]");
    }
    if (md.spectrogram_overlap >= md.spectrogram_frame) {
      throw ConfigError("md.spectrogram_overlap", "must be smaller than md.spectrogram_frame");
    }
    if (scene.empty()) throw ConfigError("scene", "must contain at least one scatterer or propeller");
    if (stop_and_go_ratio(scene, ofdm) >= 1.0) {
      throw ConfigError("scene", "scatterers move more than lambda/10 within one OFDM symbol");
    }
  } else {
    if (!(vna.f_start_hz > 0.0)) throw ConfigError("vna.f_start_hz", "must be > 0");
    if (!(vna.f_stop_hz > vna.f_start_hz)) throw ConfigError("vna.f_stop_hz", "must exceed vna.f_start_hz");
    if (vna.n_freqs < 2) throw ConfigError("vna.n_freqs", "must be >= 2");
    if (!(vna.beta_start_deg > 0.0 && vna.beta_start_deg <= 180.0)) {
      throw ConfigError("vna.beta_start_deg", "must lie in (0, 180]");
    }
    if (!(vna.beta_step_deg > 0.0)) throw ConfigError("vna.beta_step_deg", "must be > 0");
    if (!(vna.beta_stop_deg >= vna.beta_start_deg && vna.beta_stop_deg <= 180.0)) {
      throw ConfigError("vna.beta_stop_deg", "must lie in [vna.beta_start_deg, 180]");
    }
    if (!(vna.range_m > 0.0)) throw ConfigError("vna.range_m", "must be > 0");
    if (!(vna.bg_drift > -1.0)) throw ConfigError("vna.bg_drift", "must be > -1");
    const double span = static_cast<double>(vna.n_freqs - 1) / (vna.f_stop_hz - vna.f_start_hz);
    if (refl.gate.width_s >= span) throw ConfigError("refl.gate.width_s", "exceeds the unambiguous delay span");
    if (!(refl.display_f_max_hz > refl.display_f_min_hz)) {
      throw ConfigError("refl.display_f_max_hz", "must exceed refl.display_f_min_hz");
    }
    if (refl.display_f_max_hz < vna.f_start_hz || refl.display_f_min_hz > vna.f_stop_hz) {
      throw ConfigError("refl.display_f_min_hz", "display band does not overlap the sweep");
    }
  }
}

RunConfig default_md_config() {
  RunConfig c;
  c.scenario = Scenario::MicroDoppler;
  c.noise_sigma = 4e-5;
  c.scene.static_scatterers.push_back({{0.0, 0.0, 0.0}, {}, PolarimetricCoeff::scalar(1.0)});
  Propeller p;
  p.axis = {0.0, 1.0, 0.0};
  c.scene.propellers.push_back(p);
  return c;
}

RunConfig default_vna_config() {
  RunConfig c;
  c.scenario = Scenario::VnaSweep;
  c.noise_sigma = 0.0;
  PolarimetricCoeff body;
  body.m = {cd{1.0, 0.0}, cd{0.2, 0.05}, cd{0.2, 0.05}, cd{0.8, -0.1}};
  c.scene.static_scatterers.push_back({{0.0, 0.0, 0.0}, {}, body});
  // Motors at the ends of the arms.
  for (const double sx : {-1.0, 1.0}) {
    for (const double sy : {-1.0, 1.0}) {
      c.scene.static_scatterers.push_back(
          {{0.125 * sx, 0.125 * sy, 0.03}, {}, PolarimetricCoeff::scalar(0.3)});
    }
  }
  c.scene.background_scatterers = {
      {{7.0, 0.0, 3.0}, {}, PolarimetricCoeff::scalar(4.0)},
      {{0.0, -9.0, 0.0}, {}, PolarimetricCoeff::scalar(6.0)},
      {{-6.0, 5.0, 4.0}, {}, PolarimetricCoeff::scalar(5.0)},
  };
  c.scene.reciprocal = true;
  c.vna.bg_drift = 0.01;
  return c;
}

RunConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error &e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_object(j, "", {"scenario", "seed", "output_dir", "noise_sigma", "ofdm", "scene", "geometry",
                       "md", "vna", "refl"});
  Scenario scenario = Scenario::MicroDoppler;
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string()) throw ConfigError("scenario", "expected a string");
    scenario = parse_scenario(j.at("scenario").get<std::string>(), "scenario");
  }
  RunConfig c = scenario == Scenario::MicroDoppler ? default_md_config() : default_vna_config();
  if (j.contains("seed")) {
    const auto &s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("output_dir", "expected a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  read_double(j, "", "noise_sigma", c.noise_sigma);
  if (j.contains("ofdm")) {
    const auto &o = j.at("ofdm");
    check_object(o, "ofdm", {"center_freq_hz", "bandwidth_hz", "n_carriers", "n_active",
                             "symbol_duration_s", "pilot_stride", "subsample_factor"});
    read_double(o, "ofdm", "center_freq_hz", c.ofdm.center_freq_hz);
    read_double(o, "ofdm", "bandwidth_hz", c.ofdm.bandwidth_hz);
    read_count(o, "ofdm", "n_carriers", c.ofdm.n_carriers);
    read_count(o, "ofdm", "n_active", c.ofdm.n_active);
    read_double(o, "ofdm", "symbol_duration_s", c.ofdm.symbol_duration_s);
    read_count(o, "ofdm", "pilot_stride", c.ofdm.pilot_stride);
    read_count(o, "ofdm", "subsample_factor", c.ofdm.subsample_factor);
    if (o.contains("subsample_factor") && !(j.contains("md") && j.at("md").contains("subsample"))) {
      c.md.subsample = c.ofdm.subsample_factor;
    }
  }
  if (j.contains("scene")) c.scene = as_scene(j.at("scene"), "scene");
  if (j.contains("geometry")) {
    const auto &o = j.at("geometry");
    check_object(o, "geometry", {"beta_deg", "range_m", "beta_list_deg"});
    read_double(o, "geometry", "beta_deg", c.geometry.beta_deg);
    read_double(o, "geometry", "range_m", c.geometry.range_m);
    if (o.contains("beta_list_deg")) {
      const auto &a = o.at("beta_list_deg");
      if (!a.is_array()) throw ConfigError("geometry.beta_list_deg", "expected an array");
      c.geometry.beta_list_deg.clear();
      for (std::size_t i = 0; i < a.size(); ++i) {
        c.geometry.beta_list_deg.push_back(as_double(a[i], "geometry.beta_list_deg[" + std::to_string(i) + "]"));
      }
    }
  }
  if (j.contains("md")) {
    const auto &o = j.at("md");
    check_object(o, "md", {"n_symbols", "subsample", "n_fft", "window", "threshold_db",
                           "spectrogram_frame", "spectrogram_overlap", "spectrogram_window"});
    read_count(o, "md", "n_symbols", c.md.n_symbols);
    read_count(o, "md", "subsample", c.md.subsample);
    read_count(o, "md", "n_fft", c.md.n_fft);
    read(o, "md", "window", c.md.window, as_window);
    read_double(o, "md", "threshold_db", c.md.threshold_db);
    read_count(o, "md", "spectrogram_frame", c.md.spectrogram_frame);
    read_count(o, "md", "spectrogram_overlap", c.md.spectrogram_overlap);
    read(o, "md", "spectrogram_window", c.md.spectrogram_window, as_window);
    c.ofdm.subsample_factor = c.md.subsample;
  }
  if (j.contains("vna")) {
    const auto &o = j.at("vna");
    check_object(o, "vna", {"f_start_hz", "f_stop_hz", "n_freqs", "beta_start_deg", "beta_step_deg",
                            "beta_stop_deg", "range_m", "bg_drift", "turntable_deg",
                            "system_response_file"});
    read_double(o, "vna", "f_start_hz", c.vna.f_start_hz);
    read_double(o, "vna", "f_stop_hz", c.vna.f_stop_hz);
    read_count(o, "vna", "n_freqs", c.vna.n_freqs);
    read_double(o, "vna", "beta_start_deg", c.vna.beta_start_deg);
    read_double(o, "vna", "beta_step_deg", c.vna.beta_step_deg);
    read_double(o, "vna", "beta_stop_deg", c.vna.beta_stop_deg);
    read_double(o, "vna", "range_m", c.vna.range_m);
    read_double(o, "vna", "bg_drift", c.vna.bg_drift);
    read_double(o, "vna", "turntable_deg", c.vna.turntable_deg);
    if (o.contains("system_response_file")) {
      if (!o.at("system_response_file").is_string()) {
        throw ConfigError("vna.system_response_file", "expected a string");
      }
      c.vna.system_response_file = o.at("system_response_file").get<std::string>();
    }
  }
  if (j.contains("refl")) {
    const auto &o = j.at("refl");
    check_object(o, "refl", {"gate", "display_f_min_hz", "display_f_max_hz"});
    if (o.contains("gate")) {
      const auto &g = o.at("gate");
      check_object(g, "refl.gate", {"center_s", "width_s", "taper"});
      if (g.contains("center_s")) {
        if (g.at("center_s").is_null()) {
          c.refl.gate.center_s.reset();
        } else {
          c.refl.gate.center_s = as_double(g.at("center_s"), "refl.gate.center_s");
        }
      }
      read_double(g, "refl.gate", "width_s", c.refl.gate.width_s);
      read_double(g, "refl.gate", "taper", c.refl.gate.taper);
    }
    read_double(o, "refl", "display_f_min_hz", c.refl.display_f_min_hz);
    read_double(o, "refl", "display_f_max_hz", c.refl.display_f_max_hz);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig &config) { return to_json(config).dump(2); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig &config) { return fnv1a64(serialize_config(config)); }

} // namespace icas
