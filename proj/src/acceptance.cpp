#include "icas/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "icas/config.hpp"
#include "icas/geometry.hpp"
#include "icas/mdproc.hpp"
#include "icas/parallel.hpp"
#include "icas/reflproc.hpp"
#include "icas/simulate.hpp"

namespace icas {

namespace {

std::string fmt(const char *pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

constexpr std::size_t kLongRecord = 16875; // 27 rotations at 15.625 kHz

struct MdCase {
  SlowTimeProfile profile;
  DopplerSpectrum spectrum;
  LineAnalysis lines;
  SpreadResult spread;
  bool spread_ok{true};
};

MdCase run_md(const RunConfig &cfg, double beta_deg, std::size_t n_samples, double sigma,
              std::uint64_t seed, Window window = Window::Hann) {
  const auto geom = flyover_geometry(beta_deg, cfg.geometry.range_m);
  const auto cube = simulate_slow_time(cfg.scene, geom, cfg.ofdm, n_samples, {sigma, seed}, cfg.md.subsample);
  MdCase c;
  c.profile = extract_profile(cube, cfg.md.subsample);
  c.spectrum = doppler_spectrum(c.profile, 0, window);
  LineOptions lo;
  lo.threshold_db = cfg.md.threshold_db;
  c.lines = detect_lines(c.spectrum, lo);
  try {
    c.spread = measure_spread(c.spectrum, {}, lo);
  } catch (const std::domain_error &) {
    c.spread_ok = false;
  }
  return c;
}

double predicted_spread(const RunConfig &cfg, double beta_deg) {
  return predicted_spread_hz(cfg.scene.propellers.front(), flyover_geometry(beta_deg, cfg.geometry.range_m),
                             cfg.ofdm.wavelength());
}

SlowTimeProfile truncated(const SlowTimeProfile &p, std::size_t n) {
  SlowTimeProfile out = p;
  out.samples.resize(std::min(n, p.samples.size()));
  return out;
}

CriterionResult reflectivity_chain() {
  CriterionResult r{7, "reflectivity chain", false, ""};
  RunConfig cfg = default_vna_config();
  PolarimetricCoeff point;
  point.m = {cd{1.0, 0.0}, cd{0.3, 0.1}, cd{0.3, 0.1}, cd{0.7, -0.2}};
  Scene target_only;
  target_only.static_scatterers = {{{0.0, 0.0, 0.0}, {}, point}};
  Scene with_clutter = target_only;
  with_clutter.background_scatterers = cfg.scene.background_scatterers;
  Scene clutter_only;
  clutter_only.background_scatterers = cfg.scene.background_scatterers;

  const auto freqs = linear_grid(cfg.vna.f_start_hz, cfg.vna.f_stop_hz, cfg.vna.n_freqs);
  const auto betas = cfg.vna_betas();
  const auto sys = default_system_response(freqs);
  VnaSweepOptions opt;
  opt.range_m = cfg.vna.range_m;
  opt.bg_drift = 0.01;

  const auto measured = simulate_vna_sweep(with_clutter, betas, freqs, sys, {}, opt);
  ReflectivityOptions ro;
  const auto map = process_reflectivity(measured.dut_bg, measured.bg, sys, ro);

  const std::vector<cd> unity(freqs.size(), cd{1.0, 0.0});
  const auto ideal = simulate_vna_sweep(target_only, betas, freqs, unity, {}, {cfg.vna.range_m, 0.0});
  const auto ref_map = reflectivity_map(crop_frequency(ideal.dut_bg, ro.display_f_min_hz, ro.display_f_max_hz));

  const std::size_t nf = map.freqs_hz.size();
  const std::size_t lo = nf / 10, hi = nf - nf / 10;
  double worst = 0.0;
  for (std::size_t a = 0; a < map.angles_deg.size(); ++a) {
    for (Pol pol : kAllPols) {
      for (std::size_t k = lo; k < hi; ++k) {
        worst = std::max(worst, std::abs(map.at(a, pol, k) - ref_map.at(a, pol, k)));
      }
    }
  }

  // Background-only measurement through the full chain, gate held on the
  // target position.
  const auto bg_only = simulate_vna_sweep(clutter_only, betas, freqs, sys, {}, opt);
  const auto cal_bg = calibrate(bg_only.bg, sys);
  GateSpec gate = ro.gate;
  gate.center_s = 2.0 * cfg.vna.range_m / kSpeedOfLight;
  const auto residual = gate_record(background_subtract(calibrate(bg_only.dut_bg, sys), cal_bg), gate);
  const auto res_band = crop_frequency(residual, ro.display_f_min_hz, ro.display_f_max_hz);
  const auto clutter_band = crop_frequency(cal_bg, ro.display_f_min_hz, ro.display_f_max_hz);
  double p_res = 0.0, p_clutter = 0.0;
  for (std::size_t a = 0; a < res_band.angles_deg.size(); ++a) {
    for (Pol pol : {Pol::HH, Pol::VV}) {
      const auto tr = res_band.trace(a, pol);
      const auto tc = clutter_band.trace(a, pol);
      for (std::size_t k = lo; k < hi; ++k) {
        p_res += std::norm(tr[k]);
        p_clutter += std::norm(tc[k]);
      }
    }
  }
  const double residual_db = 10.0 * std::log10(p_res / p_clutter);
  r.passed = worst <= 0.5 && residual_db < -100.0;
  r.detail = "max map deviation " + fixed(worst, 4) + " dB (limit 0.5), background residual " +
             fixed(residual_db, 1) + " dB (limit -100)";
  return r;
}

CriterionResult geometry_oracle(std::uint64_t seed) {
  CriterionResult r{8, "point Doppler vs range-rate oracle", false, ""};
  std::mt19937_64 gen(mix_seed(seed, 8));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(1e9, 10e9);
  auto random_dir = [&] {
    while (true) {
      const Vec3 v{unit(gen), unit(gen), unit(gen)};
      const double n = norm(v);
      if (n > 0.1 && n <= 1.0) return v / n;
    }
  };
  constexpr double dt = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double lambda = wavelength_of(freq(gen));
    BistaticGeometry g;
    g.target = Vec3{unit(gen), unit(gen), unit(gen)} * 10.0;
    const double r_tx = lambda * (100.0 + 900.0 * (unit(gen) + 1.0));
    const double r_rx = lambda * (100.0 + 900.0 * (unit(gen) + 1.0));
    g.tx = g.target + random_dir() * r_tx;
    g.rx = g.target + random_dir() * r_rx;
    const Vec3 v = random_dir() * (1.0 + 14.5 * (unit(gen) + 1.0));
    auto path = [&](double t) {
      const Vec3 p = g.target + v * t;
      return norm(p - g.tx) + norm(p - g.rx);
    };
    const double oracle = -(path(dt) - path(-dt)) / (2.0 * dt) / lambda;
    const double model = point_doppler(g, v, lambda);
    worst = std::max(worst, std::abs(model - oracle) / std::abs(oracle));
  }
  const auto fwd = flyover_geometry(180.0, 3.0);
  bool forward_zero = true;
  for (int i = 0; i < 100; ++i) {
    forward_zero = forward_zero && point_doppler(fwd, random_dir() * 20.0, 0.08) == 0.0;
  }
  r.passed = worst < 1e-3 && forward_zero;
  r.detail = "worst relative error " + fmt("%.3e", worst) + " over 1000 geometries (limit 1e-3), beta=180 Doppler " +
             (forward_zero ? "0" : "non-zero");
  return r;
}

} // namespace

bool AcceptanceReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto &r) { return r.passed; });
}

std::string format_result(const CriterionResult &r) {
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.title + ": " + r.detail;
}

std::string AcceptanceReport::text() const {
  std::ostringstream out;
  out << "icas-sig acceptance report\n";
  out << "seed: " << seed << '\n';
  std::size_t passed = 0;
  for (const auto &r : results) {
    out << format_result(r) << '\n';
    passed += r.passed ? 1 : 0;
  }
  out << "summary: " << passed << "/" << results.size() << " passed\n";
  return out.str();
}

AcceptanceReport run_acceptance(std::uint64_t seed) {
  AcceptanceReport rep;
  rep.seed = seed;
  const RunConfig cfg = default_md_config();
  const double sigma = cfg.noise_sigma;

  // 1: default scene, line spacing and runtime.
  const auto t0 = std::chrono::steady_clock::now();
  const MdCase base = run_md(cfg, 60.0, kLongRecord, sigma, mix_seed(seed, 60));
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double bin = base.profile.sample_rate_hz / static_cast<double>(base.profile.samples.size());
  {
    const bool ok = base.lines.resolved && std::abs(base.lines.spacing_hz - 50.0) <= bin;
    const bool fast = elapsed < 30.0;
    rep.results.push_back({1, "line spacing", ok && fast,
                           "spacing " + fixed(base.lines.spacing_hz) + " Hz over " +
                               std::to_string(base.profile.samples.size()) + " samples (expected 50 +- " +
                               fixed(bin) + " Hz), runtime under 30 s: " + (fast ? "yes" : "no")});
  }

  // 2: envelope edges.
  {
    const double up = base.spread.upper_edge_hz - base.spread.center_hz;
    const double down = base.spread.center_hz - base.spread.lower_edge_hz;
    const bool ok = base.spread_ok && std::abs(up / 555.4 - 1.0) <= 0.02 && std::abs(down / 555.4 - 1.0) <= 0.02;
    rep.results.push_back({2, "maximum micro-Doppler", ok,
                           "edges +" + fixed(up, 1) + " / -" + fixed(down, 1) + " Hz (expected 555.4 +- 2%)"});
  }

  // 3: spread against bistatic angle.
  {
    const double betas[] = {0.0, 30.0, 60.0, 90.0, 120.0, 150.0};
    std::vector<double> spreads, spacings;
    double worst = 0.0;
    bool all_ok = true;
    std::string list;
    for (double beta : betas) {
      const MdCase c = beta == 60.0 ? base : run_md(cfg, beta, kLongRecord, sigma, mix_seed(seed, static_cast<std::uint64_t>(beta)));
      all_ok = all_ok && c.spread_ok && c.lines.resolved;
      const double pred = predicted_spread(cfg, beta);
      const double err = c.spread.spread_hz / pred - 1.0;
      worst = std::max(worst, std::abs(err));
      spreads.push_back(c.spread.spread_hz);
      spacings.push_back(c.lines.spacing_hz);
      list += (list.empty() ? "" : ", ") + fixed(beta, 0) + ":" + fixed(c.spread.spread_hz, 1) + "/" + fixed(pred, 1);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < spreads.size(); ++i) decreasing = decreasing && spreads[i] < spreads[i - 1];
    const auto [mn, mx] = std::minmax_element(spacings.begin(), spacings.end());
    const bool constant = *mx - *mn <= bin;
    const MdCase fwd = run_md(cfg, 176.0, kLongRecord, sigma, mix_seed(seed, 176));
    const double ratio = (fwd.spread_ok ? fwd.spread.spread_hz : INFINITY) / spreads.front();
    const bool ok = all_ok && worst <= 0.05 && decreasing && constant && ratio < 0.1;
    rep.results.push_back({3, "spread law", ok,
                           "measured/predicted Hz {" + list + "}, worst error " + fixed(100.0 * worst, 2) +
                               "% (limit 5%), decreasing " + (decreasing ? "yes" : "no") + ", spacing range " +
                               fixed(*mx - *mn) + " Hz (limit " + fixed(bin) + "), beta=176 spread " +
                               fixed(100.0 * ratio, 1) + "% of monostatic (limit 10%)"});
  }

  // 4: resolution boundary on truncations of the default profile.
  {
    const double fs = base.profile.sample_rate_hz;
    const std::size_t short_n[] = {156, 312, 468, 600};
    const std::size_t long_n[] = {1250, 1875, 2500, 5000};
    bool ok = true;
    std::string detail = "unresolved:";
    for (std::size_t n : short_n) {
      const auto la = detect_lines(doppler_spectrum(truncated(base.profile, n)));
      ok = ok && !la.resolved;
      detail += " " + std::to_string(n) + (la.resolved ? "(resolved!)" : "");
    }
    detail += "; resolved:";
    for (std::size_t n : long_n) {
      const auto la = detect_lines(doppler_spectrum(truncated(base.profile, n)));
      const bool good = la.resolved && std::abs(la.spacing_hz - 50.0) <= fs / static_cast<double>(n);
      ok = ok && good;
      detail += " " + std::to_string(n) + (good ? "" : "(unresolved!)");
    }
    detail += " (boundaries " + fixed(2.0 / 50.0 * fs, 0) + " and " + fixed(4.0 / 50.0 * fs, 0) + " samples)";
    rep.results.push_back({4, "undersampling boundary", ok, detail});
  }

  // 5: Fourier-series oracle, noiseless, whole rotations, rectangular window.
  {
    constexpr std::size_t period = 625; // one rotation at 15.625 kHz
    constexpr std::size_t n = 10 * period;
    const auto geom = flyover_geometry(60.0, cfg.geometry.range_m);
    const auto cube = simulate_slow_time(cfg.scene, geom, cfg.ofdm, n, {}, cfg.md.subsample);
    const auto profile = extract_profile(cube, cfg.md.subsample);
    const auto spec = doppler_spectrum(profile, n, Window::Rect);
    const auto a = fourier_line_oracle(profile, period);
    double amax = 0.0;
    for (const auto &v : a) amax = std::max(amax, std::abs(v));
    double worst = 0.0;
    std::size_t compared = 0;
    const auto dc = static_cast<std::ptrdiff_t>(spec.dc_index());
    for (std::size_t k = 0; k < period; ++k) {
      if (std::abs(a[k]) < 1e-3 * amax) continue;
      auto q = static_cast<std::ptrdiff_t>(k);
      if (k > period / 2) q -= static_cast<std::ptrdiff_t>(period);
      const auto idx = dc + q * static_cast<std::ptrdiff_t>(n / period);
      const double line = std::abs(spec.values[static_cast<std::size_t>(idx)]);
      worst = std::max(worst, std::abs(line - std::abs(a[k])) / std::abs(a[k]));
      ++compared;
    }
    rep.results.push_back({5, "Fourier-series oracle", compared >= 10 && worst < 0.01,
                           std::to_string(compared) + " lines within 60 dB of the strongest, worst |a_k| mismatch " +
                               fmt("%.3e", worst) + " (limit 1e-2)"});
  }

  // 6: channel estimation on a small noiseless cube.
  {
    const auto geom = flyover_geometry(60.0, cfg.geometry.range_m);
    const std::size_t symbols = 24;
    const auto cube = simulate_slow_time(cfg.scene, geom, cfg.ofdm, symbols, {}, 3);
    const auto ref = build_reference(cfg.ofdm);
    const auto est = estimate_channel(cube, ref);
    const auto active = ref.active_carriers();
    std::vector<double> freqs;
    for (std::size_t k : active) freqs.push_back(cfg.ofdm.carrier_frequency(k));
    double worst = 0.0;
    for (std::size_t m = 0; m < symbols; ++m) {
      const auto h = channel_response(cfg.scene, geom, freqs, cube.symbol_time(m));
      const auto row = est.row(m);
      for (std::size_t j = 0; j < est.carriers.size(); ++j) {
        const std::size_t pos = est.carriers[j] - active.front();
        worst = std::max(worst, std::abs(row[j] - h[pos]) / std::abs(h[pos]));
      }
    }
    rep.results.push_back({6, "channel estimation", worst < 1e-12,
                           "worst relative error " + fmt("%.3e", worst) + " on " +
                               std::to_string(est.carriers.size()) + " data carriers x " + std::to_string(symbols) +
                               " symbols (limit 1e-12)"});
  }

  rep.results.push_back(reflectivity_chain());
  rep.results.push_back(geometry_oracle(seed));

  // 9: far-field distance.
  {
    const double d = far_field_distance(4.0, 5.9e9);
    rep.results.push_back({9, "far-field distance", std::abs(d - 629.4) <= 0.1,
                           "2 D^2 / lambda for D = 4 m at 5.9 GHz = " + fixed(d, 2) + " m (expected 629.4 +- 0.1)"});
  }
  return rep;
}

} // namespace icas
