#include "icas/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "icas/acceptance.hpp"
#include "icas/config.hpp"
#include "icas/io.hpp"
#include "icas/mdproc.hpp"
#include "icas/parallel.hpp"
#include "icas/reflproc.hpp"
#include "icas/simulate.hpp"

namespace icas {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> subsample;
  std::optional<std::size_t> symbols;
  std::vector<double> beta_list;
};

void add_common(CLI::App &cmd, CommonFlags &f) {
  cmd.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd.add_option("--seed", f.seed, "Noise seed");
  cmd.add_option("--out", f.out_dir, "Output directory");
  cmd.add_option("--subsample", f.subsample, "Keep every K-th OFDM symbol")->check(CLI::PositiveNumber);
  cmd.add_option("--symbols", f.symbols, "Slow-time samples after subsampling")->check(CLI::PositiveNumber);
  cmd.add_option("--beta-list", f.beta_list, "Bistatic angles [deg]")->delimiter(',');
}

RunConfig resolve_config(const CommonFlags &f, Scenario fallback) {
  RunConfig cfg = f.config_path.empty() ? (fallback == Scenario::MicroDoppler ? default_md_config()
                                                                             : default_vna_config())
                                        : load_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (f.out_dir) cfg.output_dir = *f.out_dir;
  if (f.subsample) {
    cfg.md.subsample = *f.subsample;
    cfg.ofdm.subsample_factor = *f.subsample;
  }
  if (f.symbols) cfg.md.n_symbols = *f.symbols;
  if (!f.beta_list.empty()) cfg.geometry.beta_list_deg = f.beta_list;
  cfg.validate();
  return cfg;
}

std::string beta_tag(double beta_deg) { return "beta" + format_number(beta_deg); }

json ground_truth(const RunConfig &cfg, const BistaticGeometry &geom, double beta_deg) {
  const double lambda = cfg.ofdm.wavelength();
  json props = json::array();
  double spread = 0.0;
  for (const auto &p : cfg.scene.propellers) {
    const double b = predicted_spread_hz(p, geom, lambda);
    spread = std::max(spread, b);
    props.push_back({{"f_rot_hz", p.f_rot_hz},
                     {"n_blades", p.n_blades},
                     {"blade_length_m", p.radius_m},
                     {"line_spacing_hz", p.n_blades * p.f_rot_hz},
                     {"predicted_spread_hz", b},
                     {"predicted_max_doppler_hz", 0.5 * b}});
  }
  return {{"beta_deg", beta_deg},
          {"measured_beta_deg", rad_to_deg(bistatic_angle(geom))},
          {"range_m", cfg.geometry.range_m},
          {"wavelength_m", lambda},
          {"propellers", props},
          {"predicted_spread_hz", spread}};
}

int cmd_simulate_md(const CommonFlags &f, std::ostream &out) {
  const RunConfig cfg = resolve_config(f, Scenario::MicroDoppler);
  const std::uint64_t hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);
  for (double beta : cfg.md_betas()) {
    const auto geom = flyover_geometry(beta, cfg.geometry.range_m);
    const NoiseSpec noise{cfg.noise_sigma, mix_seed(cfg.seed, static_cast<std::uint64_t>(std::llround(beta * 1000.0)))};
    const auto cube = simulate_slow_time(cfg.scene, geom, cfg.ofdm, cfg.md.n_symbols, noise, cfg.md.subsample);
    const fs::path base = fs::path(cfg.output_dir) / ("md_" + beta_tag(beta));
    write_cube(base.string() + ".cube", cube, hash);
    json side{{"tool", kToolName},
              {"version", kToolVersion},
              {"config_hash", format_hash(hash)},
              {"cube", {{"n_carriers", cube.n_carriers},
                        {"n_symbols", cube.n_symbols},
                        {"symbol_stride", cube.symbol_stride},
                        {"symbol_rate_hz", cube.symbol_rate_hz},
                        {"slow_time_rate_hz", cube.symbol_rate_hz / static_cast<double>(cube.symbol_stride)}}},
              {"ground_truth", ground_truth(cfg, geom, beta)},
              {"config", json::parse(serialize_config(cfg))}};
    write_text_file(base.string() + ".json", side.dump(2) + "\n");
    out << "wrote " << base.string() << ".cube (" << cube.n_symbols << " x " << cube.n_carriers << ")\n";
  }
  return kExitOk;
}

struct LoadedCube {
  RunConfig config;
  double beta_deg{0.0};
  SlowTimeCube cube;
};

LoadedCube load_cube(const std::string &path, const std::string &config_override) {
  const fs::path side_path = fs::path(path).replace_extension(".json");
  json side;
  try {
    side = json::parse(read_text_file(side_path.string()));
  } catch (const json::exception &e) {
    throw ConfigError(side_path.string(), e.what());
  }
  if (!side.contains("config") || !side.contains("ground_truth")) {
    throw ConfigError(side_path.string(), "sidecar lacks config or ground_truth");
  }
  LoadedCube lc;
  lc.config = config_override.empty() ? parse_config(side.at("config").dump()) : load_config(config_override);
  lc.beta_deg = side.at("ground_truth").at("beta_deg").get<double>();
  const auto data = read_cube(path);
  const auto &h = data.header;
  if (h.n_carriers != lc.config.ofdm.n_carriers) {
    throw ConfigError("ofdm.n_carriers", "cube has " + std::to_string(h.n_carriers) + " carriers per symbol");
  }
  auto &c = lc.cube;
  c.config = lc.config.ofdm;
  c.geometry = flyover_geometry(lc.beta_deg, lc.config.geometry.range_m);
  c.n_carriers = h.n_carriers;
  c.n_symbols = h.n_symbols;
  c.symbol_stride = h.symbol_stride;
  c.symbol_rate_hz = h.symbol_rate_hz;
  c.y = data.y;
  return lc;
}

int cmd_process_md(const CommonFlags &f, const std::vector<std::string> &cubes, std::ostream &out,
                   std::ostream &err) {
  std::vector<std::pair<double, std::string>> table_rows;
  std::optional<std::uint64_t> table_hash;
  std::string out_dir;
  for (const auto &path : cubes) {
    LoadedCube lc = load_cube(path, f.config_path);
    RunConfig &cfg = lc.config;
    if (f.out_dir) cfg.output_dir = *f.out_dir;
    if (f.subsample) cfg.md.subsample = *f.subsample;
    if (f.symbols) cfg.md.n_symbols = std::min(*f.symbols, lc.cube.n_symbols);
    const std::uint64_t hash = config_hash(cfg);
    if (!table_hash) table_hash = hash;
    out_dir = cfg.output_dir;
    fs::create_directories(cfg.output_dir);

    if (cfg.md.subsample % lc.cube.symbol_stride != 0) {
      throw ConfigError("md.subsample", "must be a multiple of the cube stride " +
                                            std::to_string(lc.cube.symbol_stride));
    }
    const std::size_t step = cfg.md.subsample / lc.cube.symbol_stride;
    const std::size_t rows = std::min(lc.cube.n_symbols, cfg.md.n_symbols * step);
    lc.cube.n_symbols = rows;
    lc.cube.y.resize(rows * lc.cube.n_carriers);

    double predicted = 0.0;
    for (const auto &p : cfg.scene.propellers) {
      predicted = std::max(predicted, predicted_spread_hz(p, lc.cube.geometry, cfg.ofdm.wavelength()));
    }
    const auto profile = extract_profile(lc.cube, cfg.md.subsample, predicted);
    if (profile.warning) err << "warning: " << *profile.warning << '\n';

    const auto spec = doppler_spectrum(profile, cfg.md.n_fft, cfg.md.window);
    LineOptions lo;
    lo.threshold_db = cfg.md.threshold_db;
    const auto lines = detect_lines(spec, lo);
    std::optional<SpreadResult> spread;
    if (lines.resolved || lines.lines_hz.size() <= 1) {
      try {
        spread = measure_spread(spec, {}, lo);
      } catch (const std::domain_error &) {
      }
    }

    const std::string stem = (fs::path(cfg.output_dir) / fs::path(path).stem()).string();
    write_spectrum_csv(stem + "_spectrum.csv", spec, hash);
    if (profile.samples.size() >= cfg.md.spectrogram_frame) {
      write_spectrogram_csv(stem + "_spectrogram.csv",
                            spectrogram(profile, cfg.md.spectrogram_frame, cfg.md.spectrogram_overlap,
                                        cfg.md.spectrogram_window),
                            hash);
    } else {
      err << "warning: " << path << ": profile shorter than one spectrogram frame, spectrogram skipped\n";
    }
    write_lines_csv(stem + "_lines.csv", lines, spread ? &*spread : nullptr, hash);

    std::ostringstream table;
    table << format_number(lc.beta_deg) << ',' << (lines.resolved ? "true" : "false") << ','
          << format_number(lines.spacing_hz) << ',' << (spread ? format_number(spread->spread_hz) : "") << ','
          << (spread ? format_number(spread->lower_edge_hz) : "") << ','
          << (spread ? format_number(spread->upper_edge_hz) : "") << ',' << format_number(predicted) << '\n';
    table_rows.emplace_back(lc.beta_deg, table.str());
    out << path << ": " << profile.samples.size() << " samples, range bin " << profile.range_bin << ", "
        << (lines.resolved ? "resolved" : "unresolved") << ", spacing " << format_number(lines.spacing_hz)
        << " Hz";
    if (spread) out << ", spread " << format_number(spread->spread_hz) << " Hz";
    out << '\n';
  }
  std::ostringstream file;
  write_csv_preamble(file, *table_hash);
  file << "beta_deg,resolved,spacing_hz,spread_hz,lower_edge_hz,upper_edge_hz,predicted_spread_hz\n";
  std::stable_sort(table_rows.begin(), table_rows.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
  for (const auto &r : table_rows) file << r.second;
  write_text_file((fs::path(out_dir) / "spread_table.csv").string(), file.str());
  return kExitOk;
}

std::vector<cd> system_response_for(const RunConfig &cfg, const std::vector<double> &freqs) {
  if (cfg.vna.system_response_file.empty()) return default_system_response(freqs);
  const auto table = read_response_csv(cfg.vna.system_response_file);
  if (table.freqs_hz.size() != freqs.size()) {
    throw ConfigError("vna.system_response_file", "response has " + std::to_string(table.freqs_hz.size()) +
                                                      " points, sweep has " + std::to_string(freqs.size()));
  }
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (std::abs(table.freqs_hz[k] - freqs[k]) > 1e-6 * std::abs(freqs[k])) {
      throw ConfigError("vna.system_response_file", "frequency grid differs from the sweep grid");
    }
  }
  return table.response;
}

std::vector<double> vna_angles(const RunConfig &cfg, const CommonFlags &f) {
  if (f.beta_list.empty()) return cfg.vna_betas();
  for (double b : f.beta_list) {
    if (!(b > 0.0 && b <= 180.0)) throw ConfigError("--beta-list", "VNA angles must lie in (0, 180]");
  }
  return f.beta_list;
}

int cmd_simulate_vna(const CommonFlags &f, std::ostream &out) {
  const RunConfig cfg = resolve_config(f, Scenario::VnaSweep);
  const std::uint64_t hash = config_hash(cfg);
  fs::create_directories(cfg.output_dir);
  const auto freqs = linear_grid(cfg.vna.f_start_hz, cfg.vna.f_stop_hz, cfg.vna.n_freqs);
  const auto sys = system_response_for(cfg, freqs);
  const auto angles = vna_angles(cfg, f);
  const Scene scene = cfg.vna.turntable_deg != 0.0 ? rotate_target(cfg.scene, deg_to_rad(cfg.vna.turntable_deg))
                                                    : cfg.scene;
  const auto pair = simulate_vna_sweep(scene, angles, freqs, sys, {cfg.noise_sigma, cfg.seed},
                                       {cfg.vna.range_m, cfg.vna.bg_drift});
  const fs::path dir(cfg.output_dir);
  write_sweep_csv((dir / "dut_bg.csv").string(), pair.dut_bg, hash);
  write_sweep_csv((dir / "bg.csv").string(), pair.bg, hash);
  write_response_csv((dir / "system_response.csv").string(), freqs, sys, hash);
  json side{{"tool", kToolName},
            {"version", kToolVersion},
            {"config_hash", format_hash(hash)},
            {"angles_deg", angles},
            {"n_freqs", freqs.size()},
            {"config", json::parse(serialize_config(cfg))}};
  write_text_file((dir / "sweep.json").string(), side.dump(2) + "\n");
  out << "wrote " << angles.size() << " angles x 4 polarizations x " << freqs.size() << " points to "
      << cfg.output_dir << '\n';
  return kExitOk;
}

struct ReflFlags {
  std::string dut_bg;
  std::string bg;
  std::string response;
  std::optional<double> gate_center_ns;
  std::optional<double> gate_width_ns;
};

// A plain config file, or the sweep.json sidecar written by simulate-vna.
RunConfig load_vna_config(const std::string &path) {
  if (!fs::exists(path)) throw ConfigError("--config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception &e) {
    throw ConfigError(path, e.what());
  }
  if (j.is_object() && j.contains("tool") && j.contains("config")) return parse_config(j.at("config").dump());
  return parse_config(j.dump());
}

int cmd_process_refl(const CommonFlags &f, const ReflFlags &r, std::ostream &out) {
  std::string config_path = f.config_path;
  if (config_path.empty()) {
    const fs::path side = fs::path(r.dut_bg).parent_path() / "sweep.json";
    if (fs::exists(side)) config_path = side.string();
  }
  RunConfig cfg = config_path.empty() ? default_vna_config() : load_vna_config(config_path);
  if (f.out_dir) cfg.output_dir = *f.out_dir;
  if (r.gate_center_ns) cfg.refl.gate.center_s = *r.gate_center_ns * 1e-9;
  if (r.gate_width_ns) cfg.refl.gate.width_s = *r.gate_width_ns * 1e-9;
  cfg.validate();
  const std::uint64_t hash = config_hash(cfg);

  const auto dut_bg = read_sweep_csv(r.dut_bg);
  const auto bg = read_sweep_csv(r.bg);
  std::vector<cd> sys;
  if (!r.response.empty()) {
    const auto table = read_response_csv(r.response);
    if (table.freqs_hz.size() != dut_bg.freqs_hz.size()) {
      throw ConfigError("--response", "length differs from the sweep grid");
    }
    sys = table.response;
  } else {
    sys.assign(dut_bg.freqs_hz.size(), cd{1.0, 0.0});
  }
  if (cfg.refl.gate.center_s && dut_bg.freqs_hz.size() > 1) {
    const double step = (dut_bg.freqs_hz.back() - dut_bg.freqs_hz.front()) /
                        static_cast<double>(dut_bg.freqs_hz.size() - 1);
    const double half = 0.5 * cfg.refl.gate.width_s;
    if (*cfg.refl.gate.center_s - half < 0.0 || *cfg.refl.gate.center_s + half > 1.0 / step) {
      throw ConfigError("refl.gate.center_s", "gate must lie inside the unambiguous span [0, " +
                                                  format_number(1e9 / step) + "] ns");
    }
  }
  ReflectivityOptions opt;
  opt.gate = cfg.refl.gate;
  opt.display_f_min_hz = cfg.refl.display_f_min_hz;
  opt.display_f_max_hz = cfg.refl.display_f_max_hz;
  opt.reference_distance_m = cfg.vna.range_m;
  const auto map = process_reflectivity(dut_bg, bg, sys, opt);
  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "reflectivity_map.csv").string();
  write_map_csv(path, map, hash);
  out << "wrote " << path << " (" << map.angles_deg.size() << " angles x " << map.freqs_hz.size()
      << " points, reference power " << format_number(map.reference_power) << ")\n";
  return kExitOk;
}

int cmd_verify(const CommonFlags &f, std::ostream &out) {
  const std::uint64_t seed = f.seed.value_or(1);
  const auto report = run_acceptance(seed);
  const std::string text = report.text();
  out << text;
  if (f.out_dir) {
    fs::create_directories(*f.out_dir);
    write_text_file((fs::path(*f.out_dir) / "verify_report.txt").string(), text);
  }
  return report.all_passed() ? kExitOk : kExitNumerical;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Bistatic OFDM micro-Doppler and reflectivity toolkit", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonFlags sim_md, proc_md, sim_vna, proc_refl, verify;
  std::vector<std::string> cube_files;
  ReflFlags refl;

  auto *c1 = app.add_subcommand("simulate-md", "Simulate slow-time OFDM cubes of a rotor scene");
  add_common(*c1, sim_md);
  auto *c2 = app.add_subcommand("process-md", "Doppler spectrum, spectrogram and line analysis of cubes");
  add_common(*c2, proc_md);
  c2->add_option("cubes", cube_files, "Cube files written by simulate-md")->required()->check(CLI::ExistingFile);
  auto *c3 = app.add_subcommand("simulate-vna", "Simulate DUT_BG and BG VNA sweeps");
  add_common(*c3, sim_vna);
  auto *c4 = app.add_subcommand("process-refl", "Calibrate, subtract, gate and normalize sweeps");
  add_common(*c4, proc_refl);
  c4->add_option("dut_bg", refl.dut_bg, "Sweep CSV with target")->required()->check(CLI::ExistingFile);
  c4->add_option("bg", refl.bg, "Background sweep CSV")->required()->check(CLI::ExistingFile);
  c4->add_option("--response", refl.response, "System response CSV (default: none)")->check(CLI::ExistingFile);
  c4->add_option("--gate-center-ns", refl.gate_center_ns, "Gate centre delay [ns] (default: strongest echo)");
  c4->add_option("--gate-width-ns", refl.gate_width_ns, "Gate width [ns]");
  auto *c5 = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(*c5, verify);

  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*c1) return cmd_simulate_md(sim_md, out);
    if (*c2) return cmd_process_md(proc_md, cube_files, out, err);
    if (*c3) return cmd_simulate_vna(sim_vna, out);
    if (*c4) return cmd_process_refl(proc_refl, refl, out);
    return cmd_verify(verify, out);
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int run_cli(int argc, char **argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace icas
