#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <random>

#include "icas/config.hpp"
#include "icas/mdproc.hpp"
#include "icas/simulate.hpp"

using namespace icas;

namespace {

// 160 carriers of 125 kHz: same symbol timing as the default grid, 10x cheaper.
OfdmConfig small_grid() {
  OfdmConfig c;
  c.bandwidth_hz = 20e6;
  c.n_carriers = 160;
  c.n_active = 128;
  return c;
}

SlowTimeProfile tone(double freq_hz, double fs, std::size_t n, cd amp = 1.0) {
  SlowTimeProfile p;
  p.sample_rate_hz = fs;
  for (std::size_t i = 0; i < n; ++i) p.samples.push_back(amp * std::polar(1.0, 2 * kPi * freq_hz * i / fs));
  return p;
}

std::size_t argmax(const std::vector<double> &v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

} // namespace

TEST_CASE("channel estimation") {
  RunConfig cfg = default_md_config();
  cfg.ofdm = small_grid();
  const auto g = flyover_geometry(60.0, 50.0);
  const auto ref = build_reference(cfg.ofdm);

  SUBCASE("noiseless estimate is exact on data carriers") {
    const auto cube = simulate_slow_time(cfg.scene, g, cfg.ofdm, 6, {}, 8);
    const auto est = estimate_channel(cube, ref);
    CHECK(est.carriers == ref.data_carriers());
    std::vector<double> f;
    for (std::size_t k : est.carriers) f.push_back(cfg.ofdm.carrier_frequency(k));
    for (std::size_t m = 0; m < 6; ++m) {
      const auto h = channel_response(cfg.scene, g, f, cube.symbol_time(m));
      const auto row = est.row(m);
      for (std::size_t j = 0; j < h.size(); ++j) CHECK(std::abs(row[j] - h[j]) < 1e-12 * std::abs(h[j]));
    }
  }

  SUBCASE("zero input") {
    auto cube = simulate_slow_time(Scene{}, g, cfg.ofdm, 2, {}, 8);
    for (const auto &v : estimate_channel(cube, ref).h) CHECK(v == cd{});
  }

  SUBCASE("noisy estimate error variance") {
    Scene one;
    one.static_scatterers.push_back({{0, 0, 0}, {}, PolarimetricCoeff::scalar(1.0)});
    const double h_mag = 1.0 / (50.0 * 50.0);
    const double sigma = h_mag * 0.1; // 20 dB SNR per carrier
    const auto noisy = simulate_slow_time(one, g, cfg.ofdm, 200, {sigma, 17}, 8);
    const auto clean = simulate_slow_time(one, g, cfg.ofdm, 200, {}, 8);
    const auto a = estimate_channel(noisy, ref);
    const auto b = estimate_channel(clean, ref);
    double var = 0.0;
    for (std::size_t i = 0; i < a.h.size(); ++i) var += std::norm(a.h[i] - b.h[i]);
    var /= static_cast<double>(a.h.size());
    CHECK(var == doctest::Approx(sigma * sigma).epsilon(0.03)); // |X| = 1
  }

  SUBCASE("mismatched reference") {
    const auto cube = simulate_slow_time(cfg.scene, g, cfg.ofdm, 1, {}, 8);
    CHECK_THROWS(estimate_channel(cube, build_reference(OfdmConfig{})));
  }
}

TEST_CASE("range profile") {
  const double spacing = 125e3;
  const std::size_t n = 128;
  SUBCASE("constant channel peaks at bin 0") {
    const std::vector<cd> h(n, cd{0.3, -0.1});
    const auto rp = range_profile(h, spacing);
    CHECK(rp.peak_bin == 0);
    CHECK(std::abs(rp.bins[0] - cd{0.3, -0.1}) < 1e-15);
  }
  SUBCASE("delay maps to round(tau * B)") {
    for (double tau : {0.31e-6, 1.0e-6, 2.77e-6}) {
      std::vector<cd> h(n);
      for (std::size_t k = 0; k < n; ++k) h[k] = std::polar(1.0, -2 * kPi * k * spacing * tau);
      const auto rp = range_profile(h, spacing);
      CHECK(rp.peak_bin == static_cast<std::size_t>(std::lround(tau * spacing * n)));
      CHECK(rp.bin_delay_s == doctest::Approx(1.0 / (n * spacing)));
    }
  }
  SUBCASE("stronger of two scatterers wins") {
    std::vector<cd> h(n);
    for (std::size_t k = 0; k < n; ++k) {
      h[k] = 0.1 * std::polar(1.0, -2 * kPi * k * 3.0 / n) + std::polar(1.0, -2 * kPi * k * 40.0 / n);
    }
    CHECK(range_profile(h, spacing).peak_bin == 40);
  }
  CHECK_THROWS_AS(range_profile(std::vector<cd>(4), spacing), std::invalid_argument);
}

TEST_CASE("slow-time extraction") {
  RunConfig cfg = default_md_config();
  cfg.ofdm = small_grid();
  const auto g = flyover_geometry(60.0, 50.0);
  const auto ref = build_reference(cfg.ofdm);

  const auto cube = simulate_slow_time(cfg.scene, g, cfg.ofdm, 24, {}, 1);
  const auto est = estimate_channel(cube, ref);
  const std::size_t bin = detect_target_bin(est);
  CHECK(bin == std::lround(100.0 / kSpeedOfLight * 16e6));

  const auto all = slow_time_extract(est, bin, 1);
  CHECK(all.samples.size() == 24);
  CHECK(all.sample_rate_hz == doctest::Approx(125e3));
  CHECK(std::abs(all.samples[0] - range_profile(est, 0).bins[bin]) < 1e-15);

  const auto sub = slow_time_extract(est, bin, 8);
  CHECK(sub.sample_rate_hz == doctest::Approx(15625.0));
  CHECK(sub.samples.size() == 3);
  CHECK(std::abs(sub.samples[1] - all.samples[8]) < 1e-15);

  const auto strided = simulate_slow_time(cfg.scene, g, cfg.ofdm, 3, {}, 8);
  const auto direct = extract_profile(strided, 8);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(direct.samples[i] - sub.samples[i]) < 1e-12);
  CHECK_THROWS_AS(extract_profile(strided, 12), std::invalid_argument);

  SUBCASE("static scene gives a constant profile") {
    Scene s;
    s.static_scatterers = cfg.scene.static_scatterers;
    const auto p = extract_profile(simulate_slow_time(s, g, cfg.ofdm, 5, {}, 8), 8);
    for (const auto &v : p.samples) CHECK(v == p.samples[0]);
  }
  SUBCASE("aliasing warning") {
    CHECK_FALSE(extract_profile(strided, 8, 1111.0).warning);
    CHECK(extract_profile(strided, 8, 20000.0).warning);
  }
}

TEST_CASE("windows") {
  CHECK(parse_window("Hann") == Window::Hann);
  CHECK(parse_window("rect") == Window::Rect);
  CHECK_THROWS(parse_window("kaiser"));
  const auto w = make_window(Window::Hann, 7);
  CHECK(w[3] == doctest::Approx(1.0));
  CHECK(w[0] == doctest::Approx(std::pow(std::sin(kPi / 8), 2)));
  CHECK(w[0] == doctest::Approx(w[6]));
  for (double v : make_window(Window::Rect, 5)) CHECK(v == 1.0);
}

TEST_CASE("Doppler spectrum") {
  const double fs = 15625.0;
  SUBCASE("constant profile is a DC line of unit height") {
    const auto s = doppler_spectrum(tone(0.0, fs, 1000));
    CHECK(s.n_fft() == 4096);
    const auto mag = s.magnitude();
    CHECK(argmax(mag) == s.dc_index());
    CHECK(s.freqs_hz[s.dc_index()] == 0.0);
    CHECK(mag[s.dc_index()] == doctest::Approx(1.0));
  }
  SUBCASE("50 Hz tone") {
    for (Window w : {Window::Rect, Window::Hann}) {
      const auto s = doppler_spectrum(tone(50.0, fs, 16384, 0.25), 0, w);
      const auto mag = s.magnitude();
      const std::size_t k = argmax(mag);
      CHECK(std::abs(s.freqs_hz[k] - 50.0) <= fs / 16384.0);
      CHECK(mag[k] == doctest::Approx(0.25).epsilon(0.02));
    }
  }
  SUBCASE("axis covers (-fs/2, fs/2]") {
    const auto s = doppler_spectrum(tone(0.0, fs, 64), 64);
    CHECK(s.freqs_hz.front() == doctest::Approx(-fs / 2 + fs / 64));
    CHECK(s.freqs_hz.back() == doctest::Approx(fs / 2));
    CHECK(s.bin_hz() == doctest::Approx(fs / 64));
  }
  CHECK_THROWS(doppler_spectrum(tone(0.0, fs, 64), 32));
}

TEST_CASE("spectrogram") {
  const double fs = 25000.0;
  SUBCASE("stationary tone gives a constant ridge") {
    const auto sg = spectrogram(tone(1000.0, fs, 5000), 256, 192);
    CHECK(sg.hop == 64);
    CHECK(sg.n_frames() == (5000 - 256) / 64 + 1);
    std::size_t ridge = argmax(std::vector<double>(sg.frame(0).begin(), sg.frame(0).end()));
    CHECK(std::abs(sg.freqs_hz[ridge] - 1000.0) <= fs / 256);
    for (std::size_t i = 1; i < sg.n_frames(); ++i) {
      const auto f = sg.frame(i);
      CHECK(std::max_element(f.begin(), f.end()) - f.begin() == static_cast<std::ptrdiff_t>(ridge));
      CHECK(f[ridge] == doctest::Approx(sg.frame(0)[ridge]).epsilon(1e-9));
    }
    CHECK(sg.times_s[0] == doctest::Approx(127.5 / fs));
  }
  CHECK_THROWS(spectrogram(tone(0.0, fs, 100), 256, 0));
  CHECK_THROWS(spectrogram(tone(0.0, fs, 1000), 256, 256));
}

TEST_CASE("line detection on synthetic combs") {
  const double fs = 15625.0;
  auto comb = [&](double spacing, std::size_t n, int half_width) {
    SlowTimeProfile p;
    p.sample_rate_hz = fs;
    p.samples.assign(n, cd{});
    for (int k = -half_width; k <= half_width; ++k) {
      const double a = 1.0 / (1.0 + 0.1 * k * k);
      for (std::size_t i = 0; i < n; ++i) p.samples[i] += a * std::polar(1.0, 2 * kPi * k * spacing * i / fs + 0.3 * k);
    }
    return p;
  };
  SUBCASE("long record resolves the spacing") {
    const auto la = detect_lines(doppler_spectrum(comb(60.0, 8192, 6)));
    CHECK(la.resolved);
    CHECK(la.lines_hz.size() == 13);
    CHECK(std::abs(la.spacing_hz - 60.0) <= fs / 8192);
    CHECK(la.periodicity > 0.9);
  }
  SUBCASE("short record is unresolved") {
    const auto la = detect_lines(doppler_spectrum(comb(60.0, 300, 6)));
    CHECK_FALSE(la.resolved);
  }
  SUBCASE("noise alone has no resolved comb") {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> nd;
    SlowTimeProfile p;
    p.sample_rate_hz = fs;
    for (int i = 0; i < 8192; ++i) p.samples.push_back({nd(gen), nd(gen)});
    const auto la = detect_lines(doppler_spectrum(p));
    CHECK_FALSE(la.resolved);
    CHECK(la.lines_hz.size() <= 1);
  }
  SUBCASE("1024 symbols at 125 kHz are unresolved") {
    RunConfig cfg = default_md_config();
    cfg.ofdm = small_grid();
    const auto cube = simulate_slow_time(cfg.scene, flyover_geometry(60.0, 50.0), cfg.ofdm, 1024,
                                         {cfg.noise_sigma, 4}, 1);
    const auto la = detect_lines(doppler_spectrum(extract_profile(cube, 1)));
    CHECK_FALSE(la.resolved);
  }
}

TEST_CASE("Fourier line oracle") {
  SUBCASE("pure exponential") {
    const auto a = fourier_line_oracle(tone(1.0, 64.0, 128), 64);
    CHECK(std::abs(a[1] - 1.0) < 1e-12);
    for (std::size_t k = 0; k < 64; ++k) {
      if (k != 1) CHECK(std::abs(a[k]) < 1e-12);
    }
  }
  SUBCASE("constant") {
    const auto a = fourier_line_oracle(tone(0.0, 10.0, 40, cd{2.0, 1.0}), 20);
    CHECK(std::abs(a[0] - cd{2.0, 1.0}) < 1e-12);
    for (std::size_t k = 1; k < 20; ++k) CHECK(std::abs(a[k]) < 1e-12);
  }
  CHECK_THROWS(fourier_line_oracle(tone(0.0, 10.0, 30), 20));
}

TEST_CASE("spread of simple spectra") {
  const double fs = 15625.0;
  SUBCASE("single DC line") {
    const auto r = measure_spread(doppler_spectrum(tone(0.0, fs, 4096)));
    CHECK(r.spread_hz == 0.0);
  }
  SUBCASE("flat comb edges") {
    // 11 equal lines at 40 Hz spacing: the envelope falls between the outer
    // line and the next comb point.
    SlowTimeProfile p;
    p.sample_rate_hz = fs;
    p.samples.assign(16384, cd{});
    for (int k = -5; k <= 5; ++k) {
      for (std::size_t i = 0; i < p.samples.size(); ++i) p.samples[i] += std::polar(1.0, 2 * kPi * 40.0 * k * i / fs);
    }
    const auto r = measure_spread(doppler_spectrum(p));
    CHECK(r.upper_edge_hz > 200.0);
    CHECK(r.upper_edge_hz < 240.0);
    CHECK(r.lower_edge_hz == doctest::Approx(-r.upper_edge_hz).epsilon(1e-6));
  }
}
