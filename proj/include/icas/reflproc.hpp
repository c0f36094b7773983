#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "icas/simulate.hpp"

namespace icas {

/// Flat-top time gate with raised-cosine edges. Times are delays after the
/// inverse transform of the sweep, i.e. total path length / c.
struct GateSpec {
  /// Unset: centre on the strongest time-domain sample of each trace.
  std::optional<double> center_s;
  double width_s{4e-9};
  /// Fraction of the width used by each cosine edge.
  double taper{0.1};

  void validate() const;
};

/// Every trace divided by the system response.
SweepRecord calibrate(const SweepRecord &record, std::span<const cd> system_response);

/// DUT_BG - BG, cell by cell.
SweepRecord background_subtract(const SweepRecord &dut_bg, const SweepRecord &bg);

/// Gate weight at delay t.
double gate_weight(const GateSpec &gate, double t);

/// Hann-weighted inverse transform, gate, forward transform, then division by
/// the equally gated window (gate normalization). The gate must lie inside
/// [0, 1 / step_hz).
std::vector<cd> time_gate(std::span<const cd> s21, double step_hz, const GateSpec &gate);

/// Delay of the strongest sample of the Hann-weighted impulse response.
double strongest_delay(std::span<const cd> s21, double step_hz);

/// Gates every trace. Requires a uniform frequency grid.
SweepRecord gate_record(const SweepRecord &record, const GateSpec &gate);

/// Keeps frequency points in [f_min, f_max].
SweepRecord crop_frequency(const SweepRecord &record, double f_min_hz, double f_max_hz);

struct ReflectivityMap {
  std::vector<double> angles_deg;
  std::vector<double> freqs_hz;
  std::vector<double> db; // [angle][pol][freq], same layout as SweepRecord
  /// Largest |S21|^2 in the record; every cell is divided by it.
  double reference_power{0.0};
  /// Antenna-to-target distance the values are conditioned on [m].
  double reference_distance_m{3.0};

  double at(std::size_t angle, Pol pol, std::size_t freq) const {
    return db[(angle * kAllPols.size() + static_cast<std::size_t>(pol)) * freqs_hz.size() + freq];
  }
};

/// Power floor applied to empty cells [dB].
inline constexpr double kMapFloorDb = -300.0;

/// |S21|^2 over all cells divided by the global maximum, in dB.
ReflectivityMap reflectivity_map(const SweepRecord &record, double reference_distance_m = 3.0);

struct ReflectivityOptions {
  GateSpec gate;
  double display_f_min_hz{2e9};
  double display_f_max_hz{10e9};
  double reference_distance_m{3.0};
};

/// calibrate -> subtract -> gate over the full grid -> crop -> normalize.
ReflectivityMap process_reflectivity(const SweepRecord &dut_bg, const SweepRecord &bg,
                                     std::span<const cd> system_response,
                                     const ReflectivityOptions &options = {});

} // namespace icas
