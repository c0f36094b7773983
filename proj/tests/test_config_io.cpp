#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "icas/config.hpp"
#include "icas/io.hpp"
#include "icas/simulate.hpp"

using namespace icas;
namespace fs = std::filesystem;

namespace {

std::string field_of(const std::string &json) {
  try {
    parse_config(json);
  } catch (const ConfigError &e) {
    return e.field();
  }
  return "";
}

fs::path scratch_dir(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("icas_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

} // namespace

TEST_CASE("config defaults and round trip") {
  const RunConfig md = parse_config("{}");
  CHECK(md.scenario == Scenario::MicroDoppler);
  CHECK(md.scene.propellers.size() == 1);
  CHECK(md.ofdm == OfdmConfig{});
  CHECK(md.md.subsample == 8);

  for (const RunConfig &c : {default_md_config(), default_vna_config()}) {
    const std::string text = serialize_config(c);
    CHECK(serialize_config(parse_config(text)) == text);
    CHECK(config_hash(parse_config(text)) == config_hash(c));
  }
  CHECK(config_hash(default_md_config()) != config_hash(default_vna_config()));
  CHECK(parse_config(R"({"scenario": "flyover"})").scenario == Scenario::VnaSweep);
}

TEST_CASE("config overrides") {
  const auto c = parse_config(R"({"seed": 7, "geometry": {"beta_list_deg": [0, 90]},
                                  "md": {"window": "rect", "n_symbols": 4096},
                                  "refl": {"gate": {"center_s": 2e-8, "width_s": 5e-9}}})");
  CHECK(c.seed == 7);
  CHECK(c.md_betas() == std::vector<double>{0.0, 90.0});
  CHECK(c.md.window == Window::Rect);
  CHECK(c.md.n_symbols == 4096);
  REQUIRE(c.refl.gate.center_s);
  CHECK(*c.refl.gate.center_s == 2e-8);
  CHECK(parse_config(R"({"ofdm": {"subsample_factor": 4}})").md.subsample == 4);
}

TEST_CASE("config errors name the field") {
  CHECK(field_of(R"({"sed": 1})") == "sed");
  CHECK(field_of(R"({"ofdm": {"n_active": 2000}})") == "ofdm.n_active");
  CHECK(field_of(R"({"ofdm": {"symbol_duration_s": 1e-5}})") == "ofdm.symbol_duration_s");
  CHECK(field_of(R"({"geometry": {"beta_deg": 200}})") == "geometry.beta_deg");
  CHECK(field_of(R"({"md": {"window": "kaiser"}})") == "md.window");
  CHECK(field_of(R"({"seed": -1})") == "seed");
  CHECK(field_of(R"({"refl": {"gate": {"taper": 0.7}}})").rfind("refl.gate", 0) == 0);
  CHECK(field_of(R"({"scene": {"propellers": [{"n_blades": 0}]}})").rfind("scene.propellers[0]", 0) == 0);
  CHECK(field_of("{not json") == "<root>");
  CHECK(field_of(R"({"scene": {"reciprocal": true, "static_scatterers": [
      {"position_m": [0,0,0], "coeff": {"hh": [1,0], "hv": [0.1,0], "vh": [0.2,0], "vv": [1,0]}}]}})")
            .rfind("scene", 0) == 0);
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(format_hash(0xabcULL) == "0000000000000abc");
}

TEST_CASE("numbers round trip through text") {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 3.7e9, 0.0}) {
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("cube file") {
  const auto dir = scratch_dir("cube");
  RunConfig cfg = default_md_config();
  cfg.ofdm.bandwidth_hz = 20e6;
  cfg.ofdm.n_carriers = 160;
  cfg.ofdm.n_active = 128;
  const auto cube = simulate_slow_time(cfg.scene, flyover_geometry(60, 50), cfg.ofdm, 5, {1e-4, 2}, 8);
  const std::string path = (dir / "c.cube").string();
  write_cube(path, cube, 0x1234);
  CHECK(fs::file_size(path) == 64 + 5 * 160 * 8);
  const auto back = read_cube(path);
  CHECK(back.header.n_carriers == 160);
  CHECK(back.header.n_symbols == 5);
  CHECK(back.header.symbol_stride == 8);
  CHECK(back.header.symbol_rate_hz == 125e3);
  CHECK(back.header.center_freq_hz == 3.7e9);
  CHECK(back.header.config_hash == 0x1234);
  for (std::size_t i = 0; i < cube.y.size(); ++i) {
    CHECK(back.y[i].real() == static_cast<float>(cube.y[i].real()));
  }
  std::ifstream raw(path, std::ios::binary);
  char magic[8];
  raw.read(magic, 8);
  CHECK(std::string(magic, 8) == "ICASCUBE");

  write_text_file((dir / "bad.cube").string(), "ICASCUBE");
  CHECK_THROWS(read_cube((dir / "bad.cube").string()));
}

TEST_CASE("sweep and response CSV") {
  const auto dir = scratch_dir("sweep");
  const RunConfig cfg = default_vna_config();
  const auto f = linear_grid(2e9, 3e9, 11);
  const auto sys = default_system_response(f);
  const std::vector<double> betas{10.0, 15.0};
  const auto pair = simulate_vna_sweep(cfg.scene, betas, f, sys, {});
  const std::string path = (dir / "dut.csv").string();
  write_sweep_csv(path, pair.dut_bg, 42);
  const auto back = read_sweep_csv(path);
  CHECK(back.label == SweepLabel::DutBg);
  CHECK(back.freqs_hz == pair.dut_bg.freqs_hz);
  CHECK(back.angles_deg == pair.dut_bg.angles_deg);
  CHECK(back.s21 == pair.dut_bg.s21);
  const auto text = read_text_file(path);
  CHECK(text.rfind("# tool: icas-sig", 0) == 0);
  CHECK(text.find("# config_hash: 000000000000002a") != std::string::npos);

  write_response_csv((dir / "r.csv").string(), f, sys, 1);
  const auto r = read_response_csv((dir / "r.csv").string());
  CHECK(r.response == sys);

  write_text_file((dir / "broken.csv").string(), "label,angle_deg,pol,freq_hz,re,im\nBG,10,HH,2e9,x,0\n");
  CHECK_THROWS(read_sweep_csv((dir / "broken.csv").string()));
}
