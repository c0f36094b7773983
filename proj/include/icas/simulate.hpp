#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "icas/geometry.hpp"
#include "icas/scene.hpp"
#include "icas/waveform.hpp"

namespace icas {

/// Circularly-symmetric complex white noise. sigma is the standard deviation
/// of the complex sample (each quadrature gets sigma / sqrt(2)).
struct NoiseSpec {
  double sigma{0.0};
  std::uint64_t seed{0};
};

/// Received spectra Y(f, m) for consecutive retained symbols.
///
/// Row m holds OFDM symbol number m * symbol_stride, i.e. it was transmitted
/// at t = m * symbol_stride / symbol_rate_hz. A stride above one means the
/// symbols in between were never synthesized.
struct SlowTimeCube {
  OfdmConfig config;
  BistaticGeometry geometry;
  std::size_t n_carriers{0};
  std::size_t n_symbols{0};
  std::size_t symbol_stride{1};
  double symbol_rate_hz{0.0};
  std::vector<cd> y; // symbol-major, n_symbols x n_carriers

  double symbol_time(std::size_t m) const {
    return static_cast<double>(m * symbol_stride) / symbol_rate_hz;
  }
  std::span<const cd> symbol(std::size_t m) const {
    return {y.data() + m * n_carriers, n_carriers};
  }
  std::span<cd> symbol(std::size_t m) { return {y.data() + m * n_carriers, n_carriers}; }
};

enum class SweepLabel { DutBg, Bg };

/// S21 over (bistatic angle, polarization, frequency).
struct SweepRecord {
  SweepLabel label{SweepLabel::DutBg};
  std::vector<double> freqs_hz;
  std::vector<double> angles_deg;
  std::vector<cd> s21; // [angle][pol][freq]

  std::size_t index(std::size_t angle, Pol pol, std::size_t freq) const {
    return (angle * kAllPols.size() + static_cast<std::size_t>(pol)) * freqs_hz.size() + freq;
  }
  std::span<const cd> trace(std::size_t angle, Pol pol) const {
    return {s21.data() + index(angle, pol, 0), freqs_hz.size()};
  }
  std::span<cd> trace(std::size_t angle, Pol pol) {
    return {s21.data() + index(angle, pol, 0), freqs_hz.size()};
  }
  bool same_grid(const SweepRecord &o) const {
    return freqs_hz == o.freqs_hz && angles_deg == o.angles_deg && s21.size() == o.s21.size();
  }
};

struct VnaSweepPair {
  SweepRecord dut_bg;
  SweepRecord bg;
};

struct VnaSweepOptions {
  /// Target-to-antenna distance on both legs [m].
  double range_m{3.0};
  /// Relative amplitude change of the background between the two
  /// measurements; models chamber drift that subtraction cannot remove.
  double bg_drift{0.0};
};

/// H(f) = sum_i a_i(pol) / (d_tx,i d_rx,i) exp(-j 2 pi f (d_tx,i + d_rx,i) / c) over
/// target and background scatterers at time t. Uniformly spaced grids are
/// evaluated with tabulated phase steps re-anchored every 128 points.
std::vector<cd> channel_response(const Scene &scene, const BistaticGeometry &geom,
                                 std::span<const double> freqs, double t, Pol pol = Pol::HH);

/// Same sum over an explicit scatterer list.
std::vector<cd> channel_response(std::span<const PointScatterer> scatterers,
                                 const BistaticGeometry &geom, std::span<const double> freqs,
                                 Pol pol = Pol::HH);

/// Stop-and-go OFDM simulation: Y(f, m) = H(f, t_m) X(f) + noise. Noise for row m
/// is drawn from a generator seeded by (noise.seed, m), so rows can be
/// computed in any order.
SlowTimeCube simulate_slow_time(const Scene &scene, const BistaticGeometry &geom,
                                const OfdmConfig &config, std::size_t n_symbols,
                                const NoiseSpec &noise, std::size_t symbol_stride = 1,
                                Pol pol = Pol::HH);

/// Largest scatterer displacement during one symbol divided by lambda/10.
/// Stop-and-go holds while this is below one.
double stop_and_go_ratio(const Scene &scene, const OfdmConfig &config);

/// Target placed at the origin, antennas `range_m` away, bisector pointing
/// down (-z) so the lower hemisphere is illuminated. beta = 180 deg puts Tx,
/// target and Rx on the x axis.
BistaticGeometry flyover_geometry(double beta_deg, double range_m = 3.0);

/// One geometry per requested beta in (0, 180] degrees.
std::vector<BistaticGeometry> flyover_sweep(std::span<const double> betas_deg,
                                            double range_m = 3.0);

std::vector<double> linear_grid(double start, double stop, std::size_t n);
/// start, start + step, ..., up to stop inclusive (within 1e-9 step).
std::vector<double> stepped_grid(double start, double step, double stop);

/// Smooth complex ripple standing in for antennas, cables, VNA and attenuator.
std::vector<cd> default_system_response(std::span<const double> freqs);

/// Both labels over the angle grid. BG sees only background scatterers; DUT_BG
/// adds the target (static scatterers and propellers frozen at t = 0). All four
/// polarization channels are produced and multiplied by system_response.
VnaSweepPair simulate_vna_sweep(const Scene &scene, std::span<const double> betas_deg,
                                std::span<const double> freqs,
                                std::span<const cd> system_response, const NoiseSpec &noise,
                                const VnaSweepOptions &options = {});

} // namespace icas
