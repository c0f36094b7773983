#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <random>

#include "icas/config.hpp"
#include "icas/fft.hpp"
#include "icas/mdproc.hpp"
#include "icas/reflproc.hpp"
#include "icas/simulate.hpp"

using namespace icas;

namespace {

constexpr double kStep = 10e6;

std::vector<double> sweep_freqs() { return linear_grid(2e9, 18e9, 1601); }

std::vector<cd> echo(double delay_s, double amp = 1.0) {
  const auto f = sweep_freqs();
  std::vector<cd> x(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) x[k] = std::polar(amp, -2 * kPi * f[k] * delay_s);
  return x;
}

double db(double v) { return 20.0 * std::log10(v); }

SweepRecord record_from(const Scene &scene, std::span<const cd> sys = {}) {
  const auto f = sweep_freqs();
  const std::vector<cd> unity(f.size(), 1.0);
  const std::vector<double> betas{10.0, 60.0, 120.0, 170.0};
  return simulate_vna_sweep(scene, betas, f, sys.empty() ? std::span<const cd>(unity) : sys, {}).dut_bg;
}

SweepRecord as_background(SweepRecord r) {
  r.label = SweepLabel::Bg;
  return r;
}

} // namespace

TEST_CASE("gate spec") {
  CHECK_NOTHROW(GateSpec{}.validate());
  CHECK_THROWS(GateSpec{std::nullopt, 0.0, 0.1}.validate());
  CHECK_THROWS(GateSpec{std::nullopt, 4e-9, 0.6}.validate());
  const GateSpec g{20e-9, 4e-9, 0.1};
  CHECK(gate_weight(g, 20e-9) == 1.0);
  CHECK(gate_weight(g, 21.5e-9) == 1.0);
  CHECK(gate_weight(g, 21.8e-9) == doctest::Approx(0.5));
  CHECK(gate_weight(g, 22.1e-9) == 0.0);
}

TEST_CASE("time gate") {
  SUBCASE("centred echo keeps its magnitude over the mid band") {
    for (double tau : {20e-9, 20.013e-9, 37.3e-9}) {
      const auto x = echo(tau, 0.1);
      const auto y = time_gate(x, kStep, {});
      double worst = 0.0;
      for (std::size_t k = 160; k < 1441; ++k) worst = std::max(worst, std::abs(db(std::abs(y[k]) / 0.1)));
      CHECK(worst < 0.5);
      CHECK(strongest_delay(x, kStep) == doctest::Approx(tau).epsilon(0.01));
    }
  }
  SUBCASE("echo outside the gate is suppressed by 60 dB") {
    for (double tau : {30e-9, 45e-9, 70e-9}) {
      const auto y = time_gate(echo(tau), kStep, {20e-9, 4e-9, 0.1});
      double worst = 0.0;
      for (std::size_t k = 160; k < 1441; ++k) worst = std::max(worst, std::abs(y[k]));
      CHECK(db(worst) < -60.0);
    }
  }
  SUBCASE("zero in, zero out") {
    for (const auto &v : time_gate(std::vector<cd>(1601), kStep, {20e-9, 4e-9, 0.1})) CHECK(v == cd{});
  }
  SUBCASE("idempotent inside the gate") {
    auto x = echo(20.02e-9);
    const auto e2 = echo(55e-9, 3.0);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += e2[k];
    const GateSpec g{20e-9, 4e-9, 0.1};
    const auto once = time_gate(x, kStep, g);
    const auto twice = time_gate(once, kStep, g);
    const auto w = make_window(Window::Hann, x.size());
    auto impulse = [&](std::vector<cd> s) {
      for (std::size_t k = 0; k < s.size(); ++k) s[k] *= w[k];
      return fft::inverse(s);
    };
    const auto h1 = impulse(once);
    const auto h2 = impulse(twice);
    const double dt = 1.0 / (kStep * static_cast<double>(x.size()));
    double p1 = 0.0, p2 = 0.0, peak = 0.0;
    for (std::size_t k = 0; k < h1.size(); ++k) {
      if (gate_weight(g, static_cast<double>(k) * dt) == 0.0) continue;
      p1 += std::norm(h1[k]);
      p2 += std::norm(h2[k]);
      peak = std::max(peak, std::abs(h1[k]));
    }
    CHECK(std::abs(10.0 * std::log10(p2 / p1)) < 1e-3);
    double worst = 0.0;
    for (std::size_t k = 0; k < h1.size(); ++k) {
      if (gate_weight(g, static_cast<double>(k) * dt) == 0.0 || std::abs(h1[k]) < 0.1 * peak) continue;
      worst = std::max(worst, std::abs(db(std::abs(h2[k]) / std::abs(h1[k]))));
    }
    CHECK(worst < 1e-3);
  }
  SUBCASE("gate outside the unambiguous span") {
    CHECK_THROWS_AS(time_gate(echo(20e-9), kStep, {99e-9, 4e-9, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(time_gate(echo(20e-9), kStep, {1e-9, 4e-9, 0.1}), std::invalid_argument);
  }
}

TEST_CASE("calibration and background subtraction") {
  const RunConfig cfg = default_vna_config();
  const auto f = sweep_freqs();
  const auto sys = default_system_response(f);
  Scene target = cfg.scene;
  target.background_scatterers.clear();

  const auto raw = record_from(target, sys);
  const auto clean = record_from(target);
  const auto cal = calibrate(raw, sys);
  double err = 0.0;
  for (std::size_t i = 0; i < cal.s21.size(); ++i) err = std::max(err, std::abs(cal.s21[i] - clean.s21[i]) / std::abs(clean.s21[i]));
  CHECK(err < 1e-12);

  const std::vector<cd> unity(f.size(), 1.0);
  CHECK(calibrate(raw, unity).s21 == raw.s21);
  std::vector<cd> bad = sys;
  bad[3] = 0.0;
  CHECK_THROWS(calibrate(raw, bad));

  SUBCASE("single scatterer is flat after calibration") {
    Scene one;
    one.static_scatterers.push_back({{0, 0, 0}, {}, PolarimetricCoeff::scalar(1.0)});
    const auto c = calibrate(record_from(one, sys), sys);
    const auto tr = c.trace(1, Pol::HH);
    double lo = INFINITY, hi = 0.0;
    for (const auto &v : tr) {
      lo = std::min(lo, std::abs(v));
      hi = std::max(hi, std::abs(v));
    }
    CHECK(db(hi / lo) < 1e-10);
  }
  SUBCASE("subtraction") {
    const auto zero = background_subtract(raw, as_background(raw));
    for (const auto &v : zero.s21) CHECK(v == cd{});
    SweepRecord other = raw;
    other.freqs_hz.pop_back();
    CHECK_THROWS(background_subtract(raw, as_background(other)));
    CHECK_THROWS(background_subtract(raw, raw));
  }
  SUBCASE("calibrate and subtract commute") {
    Scene bg_scene;
    bg_scene.background_scatterers = cfg.scene.background_scatterers;
    const auto bg = as_background(record_from(bg_scene, sys));
    const auto a = background_subtract(calibrate(raw, sys), calibrate(bg, sys));
    const auto b = calibrate(background_subtract(raw, bg), sys);
    double d = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < a.s21.size(); ++i) {
      d = std::max(d, std::abs(a.s21[i] - b.s21[i]));
      peak = std::max(peak, std::abs(a.s21[i]));
    }
    CHECK(d < 1e-12 * peak);
  }
  SUBCASE("independent noise adds in power") {
    Scene empty;
    const std::vector<double> betas{30.0};
    const auto p = simulate_vna_sweep(empty, betas, f, unity, {1e-3, 8});
    const auto r = background_subtract(p.dut_bg, p.bg);
    double pw = 0.0;
    for (const auto &v : r.s21) pw += std::norm(v);
    CHECK(pw / static_cast<double>(r.s21.size()) == doctest::Approx(2e-6).epsilon(0.05));
  }
}

TEST_CASE("reflectivity map") {
  Scene iso;
  iso.static_scatterers.push_back({{0, 0, 0}, {}, PolarimetricCoeff::scalar(1.0)});
  const auto rec = record_from(iso);
  const auto map = reflectivity_map(rec);
  CHECK(*std::max_element(map.db.begin(), map.db.end()) == 0.0);
  CHECK(map.reference_distance_m == 3.0);
  for (std::size_t k = 0; k < map.freqs_hz.size(); k += 100) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t a = 0; a < map.angles_deg.size(); ++a) {
      lo = std::min(lo, map.at(a, Pol::HH, k));
      hi = std::max(hi, map.at(a, Pol::HH, k));
    }
    CHECK(hi - lo < 0.1);
  }

  SUBCASE("single dominant cell") {
    SweepRecord r = rec;
    std::fill(r.s21.begin(), r.s21.end(), cd{1e-3});
    r.s21[r.index(2, Pol::VH, 77)] = 5.0;
    const auto m = reflectivity_map(r);
    CHECK(m.at(2, Pol::VH, 77) == 0.0);
    CHECK(m.reference_power == doctest::Approx(25.0));
  }
  SUBCASE("scale invariance") {
    SweepRecord r = rec;
    for (auto &v : r.s21) v *= cd{-3.0, 7.0};
    const auto m = reflectivity_map(r);
    for (std::size_t i = 0; i < m.db.size(); i += 53) CHECK(m.db[i] == doctest::Approx(map.db[i]).epsilon(1e-9));
  }
  SUBCASE("HV/VH swap in a reciprocal scene") {
    const RunConfig cfg = default_vna_config();
    Scene t = cfg.scene;
    t.background_scatterers.clear();
    const auto m = reflectivity_map(record_from(t));
    for (std::size_t a = 0; a < m.angles_deg.size(); ++a) {
      for (std::size_t k = 0; k < m.freqs_hz.size(); k += 40) CHECK(m.at(a, Pol::HV, k) == m.at(a, Pol::VH, k));
    }
  }
  SUBCASE("empty record") {
    SweepRecord r = rec;
    std::fill(r.s21.begin(), r.s21.end(), cd{});
    CHECK_THROWS_AS(reflectivity_map(r), std::domain_error);
  }
}

TEST_CASE("display crop") {
  Scene iso;
  iso.static_scatterers.push_back({{0, 0, 0}, {}, PolarimetricCoeff::scalar(1.0)});
  const auto c = crop_frequency(record_from(iso), 2e9, 10e9);
  CHECK(c.freqs_hz.size() == 801);
  CHECK(c.freqs_hz.back() == doctest::Approx(10e9));
  CHECK_THROWS(crop_frequency(c, 20e9, 30e9));
}

TEST_CASE("end-to-end chain recovers the target map") {
  const RunConfig cfg = default_vna_config();
  const auto f = sweep_freqs();
  const auto sys = default_system_response(f);
  const std::vector<double> betas{10.0, 90.0, 180.0};
  Scene target = cfg.scene;
  target.background_scatterers.clear();
  const auto meas = simulate_vna_sweep(cfg.scene, betas, f, sys, {}, {3.0, 0.01});
  const auto map = process_reflectivity(meas.dut_bg, meas.bg, sys);
  const std::vector<cd> unity(f.size(), 1.0);
  const auto truth = reflectivity_map(crop_frequency(simulate_vna_sweep(target, betas, f, unity, {}).dut_bg, 2e9, 10e9));
  // The drone surrogate is several scatterers within a few cm, all inside the gate.
  double worst = 0.0;
  for (std::size_t a = 0; a < betas.size(); ++a) {
    for (Pol p : {Pol::HH, Pol::VV}) {
      for (std::size_t k = 80; k < 721; ++k) worst = std::max(worst, std::abs(map.at(a, p, k) - truth.at(a, p, k)));
    }
  }
  CHECK(worst < 0.5);
}
