#include "icas/reflproc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "icas/fft.hpp"
#include "icas/mdproc.hpp"
#include "icas/parallel.hpp"

namespace icas {

void GateSpec::validate() const {
  if (!(width_s > 0.0) || !std::isfinite(width_s)) {
    throw std::invalid_argument("gate.width_s: must be > 0");
  }
  if (!(taper >= 0.0 && taper <= 0.5)) {
    throw std::invalid_argument("gate.taper: must lie in [0, 0.5]");
  }
  if (center_s && !std::isfinite(*center_s)) {
    throw std::invalid_argument("gate.center_s: must be finite");
  }
}

SweepRecord calibrate(const SweepRecord &record, std::span<const cd> system_response) {
  if (system_response.size() != record.freqs_hz.size()) {
    throw std::invalid_argument("calibrate: system response length does not match the frequency grid");
  }
  for (std::size_t k = 0; k < system_response.size(); ++k) {
    if (std::abs(system_response[k]) == 0.0) {
      throw std::invalid_argument("calibrate: system response is zero at point " + std::to_string(k));
    }
  }
  SweepRecord out = record;
  const std::size_t nf = record.freqs_hz.size();
  for (std::size_t i = 0; i < out.s21.size(); ++i) {
    out.s21[i] /= system_response[i % nf];
  }
  return out;
}

SweepRecord background_subtract(const SweepRecord &dut_bg, const SweepRecord &bg) {
  if (!dut_bg.same_grid(bg)) {
    throw std::invalid_argument("background_subtract: records use different grids");
  }
  if (dut_bg.label != SweepLabel::DutBg || bg.label != SweepLabel::Bg) {
    throw std::invalid_argument("background_subtract: expected a DUT_BG record and a BG record");
  }
  SweepRecord out = dut_bg;
  for (std::size_t i = 0; i < out.s21.size(); ++i) out.s21[i] -= bg.s21[i];
  return out;
}

double gate_weight(const GateSpec &gate, double t) {
  const double half = 0.5 * gate.width_s;
  const double edge = gate.taper * gate.width_s;
  const double d = std::abs(t - gate.center_s.value_or(0.0));
  if (d >= half) return 0.0;
  if (d <= half - edge) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (d - (half - edge)) / edge));
}

namespace {

constexpr double kGateRegularization = 1e-3;

std::vector<cd> impulse_response(std::span<const cd> s21, const std::vector<double> &w) {
  std::vector<cd> buf(s21.size());
  for (std::size_t k = 0; k < s21.size(); ++k) buf[k] = s21[k] * w[k];
  fft::inverse(buf, buf);
  return buf;
}

} // namespace

double strongest_delay(std::span<const cd> s21, double step_hz) {
  if (s21.empty()) {
    throw std::invalid_argument("strongest_delay: empty trace");
  }
  const auto h = impulse_response(s21, make_window(Window::Hann, s21.size()));
  std::size_t best = 0;
  for (std::size_t n = 1; n < h.size(); ++n) {
    if (std::abs(h[n]) > std::abs(h[best])) best = n;
  }
  return static_cast<double>(best) / (static_cast<double>(s21.size()) * step_hz);
}

std::vector<cd> time_gate(std::span<const cd> s21, double step_hz, const GateSpec &gate) {
  gate.validate();
  if (s21.size() < 2) {
    throw std::invalid_argument("time_gate: need at least two frequency points");
  }
  if (!(step_hz > 0.0)) {
    throw std::invalid_argument("time_gate: frequency step must be > 0");
  }
  const std::size_t n = s21.size();
  const double span = 1.0 / step_hz;
  GateSpec g = gate;
  if (!g.center_s) {
    g.center_s = std::clamp(strongest_delay(s21, step_hz), 0.5 * g.width_s, span - 0.5 * g.width_s);
  }
  if (*g.center_s - 0.5 * g.width_s < 0.0 || *g.center_s + 0.5 * g.width_s > span) {
    std::ostringstream msg;
    msg << "time_gate: gate [" << (*g.center_s - 0.5 * g.width_s) * 1e9 << ", "
        << (*g.center_s + 0.5 * g.width_s) * 1e9 << "] ns lies outside the unambiguous span [0, "
        << span * 1e9 << "] ns";
    throw std::invalid_argument(msg.str());
  }
  const auto w = make_window(Window::Hann, n);
  auto h = impulse_response(s21, w);
  const double dt = span / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) h[k] *= gate_weight(g, static_cast<double>(k) * dt);
  fft::forward(h, h);

  // Divide by the gated window rather than the window itself: the same gate,
  // moved to zero delay, applied to the bare window. An echo at the gate
  // centre comes back unchanged. The division is regularized so that the
  // first and last few points, where the window is nearly zero and gate
  // truncation dominates, roll off instead of blowing up.
  std::vector<cd> ref(w.begin(), w.end());
  fft::inverse(ref, ref);
  GateSpec at_zero = g;
  at_zero.center_s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = k < (n + 1) / 2 ? static_cast<double>(k) * dt
                                     : -static_cast<double>(n - k) * dt;
    ref[k] *= gate_weight(at_zero, t);
  }
  fft::forward(ref, ref);
  double ref_max = 0.0;
  for (const auto &v : ref) ref_max = std::max(ref_max, std::abs(v));
  const double eps2 = std::pow(kGateRegularization * ref_max, 2);
  for (std::size_t k = 0; k < n; ++k) h[k] *= std::conj(ref[k]) / (std::norm(ref[k]) + eps2);
  return h;
}

namespace {

double uniform_step(const std::vector<double> &f) {
  if (f.size() < 2) {
    throw std::invalid_argument("frequency grid needs at least two points");
  }
  const double step = (f.back() - f.front()) / static_cast<double>(f.size() - 1);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (std::abs(f[k] - (f.front() + static_cast<double>(k) * step)) > 1e-6 * step) {
      throw std::invalid_argument("time gating needs a uniform frequency grid");
    }
  }
  return step;
}

} // namespace

SweepRecord gate_record(const SweepRecord &record, const GateSpec &gate) {
  const double step = uniform_step(record.freqs_hz);
  SweepRecord out = record;
  const std::size_t n_pol = kAllPols.size();
  parallel_for(record.angles_deg.size() * n_pol, [&](std::size_t item) {
    const std::size_t a = item / n_pol;
    const Pol pol = kAllPols[item % n_pol];
    const auto gated = time_gate(record.trace(a, pol), step, gate);
    std::copy(gated.begin(), gated.end(), out.trace(a, pol).begin());
  });
  return out;
}

SweepRecord crop_frequency(const SweepRecord &record, double f_min_hz, double f_max_hz) {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < record.freqs_hz.size(); ++k) {
    if (record.freqs_hz[k] >= f_min_hz && record.freqs_hz[k] <= f_max_hz) keep.push_back(k);
  }
  if (keep.empty()) {
    throw std::invalid_argument("crop_frequency: no frequency points inside the display band");
  }
  SweepRecord out;
  out.label = record.label;
  out.angles_deg = record.angles_deg;
  for (std::size_t k : keep) out.freqs_hz.push_back(record.freqs_hz[k]);
  out.s21.resize(record.angles_deg.size() * kAllPols.size() * keep.size());
  for (std::size_t a = 0; a < record.angles_deg.size(); ++a) {
    for (Pol pol : kAllPols) {
      const auto src = record.trace(a, pol);
      auto dst = out.trace(a, pol);
      for (std::size_t j = 0; j < keep.size(); ++j) dst[j] = src[keep[j]];
    }
  }
  return out;
}

ReflectivityMap reflectivity_map(const SweepRecord &record, double reference_distance_m) {
  if (record.s21.empty()) {
    throw std::invalid_argument("reflectivity_map: empty record");
  }
  ReflectivityMap map;
  map.angles_deg = record.angles_deg;
  map.freqs_hz = record.freqs_hz;
  map.reference_distance_m = reference_distance_m;
  double peak = 0.0;
  for (const auto &v : record.s21) peak = std::max(peak, std::norm(v));
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw std::domain_error("reflectivity_map: record has no finite non-zero cell to normalize by");
  }
  map.reference_power = peak;
  map.db.resize(record.s21.size());
  for (std::size_t i = 0; i < record.s21.size(); ++i) {
    const double p = std::norm(record.s21[i]) / peak;
    map.db[i] = p > 0.0 ? std::max(kMapFloorDb, 10.0 * std::log10(p)) : kMapFloorDb;
  }
  return map;
}

ReflectivityMap process_reflectivity(const SweepRecord &dut_bg, const SweepRecord &bg,
                                     std::span<const cd> system_response,
                                     const ReflectivityOptions &options) {
  const auto target = background_subtract(calibrate(dut_bg, system_response),
                                          calibrate(bg, system_response));
  const auto gated = gate_record(target, options.gate);
  return reflectivity_map(crop_frequency(gated, options.display_f_min_hz, options.display_f_max_hz),
                          options.reference_distance_m);
}

} // namespace icas
