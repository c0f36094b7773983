#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "icas/simulate.hpp"
#include "icas/waveform.hpp"

namespace icas {

/// H(f, m) = Y(f, m) / X(f) on the active non-pilot carriers.
struct ChannelEstimateCube {
  OfdmConfig config;
  /// Carrier indices (0..n_carriers-1) kept in the estimate, ascending.
  std::vector<std::size_t> carriers;
  std::size_t n_symbols{0};
  std::size_t symbol_stride{1};
  double symbol_rate_hz{0.0};
  std::vector<cd> h; // symbol-major, n_symbols x carriers.size()

  std::span<const cd> row(std::size_t m) const {
    return {h.data() + m * carriers.size(), carriers.size()};
  }
};

ChannelEstimateCube estimate_channel(const SlowTimeCube &cube, const ReferenceSymbol &ref);

struct RangeProfile {
  std::vector<cd> bins;
  std::size_t peak_bin{0};
  /// Delay covered by one bin [s].
  double bin_delay_s{0.0};
};

/// Inverse DFT of a contiguous carrier block, normalized by its length.
/// Bin n corresponds to delay n / (n * carrier spacing). Needs >= 8 carriers.
RangeProfile range_profile(std::span<const cd> h, double carrier_spacing_hz);

/// Range profile of symbol m over the active block. Pilot positions are
/// zero-filled and the result is normalized by the number of data carriers.
RangeProfile range_profile(const ChannelEstimateCube &est, std::size_t m);

/// Range bin with the largest incoherent sum of |profile| over the first
/// `max_symbols` symbols.
std::size_t detect_target_bin(const ChannelEstimateCube &est, std::size_t max_symbols = 64);

struct SlowTimeProfile {
  std::vector<cd> samples;
  double sample_rate_hz{0.0};
  std::size_t range_bin{0};
  /// Set when the predicted micro-Doppler spread exceeds the sample rate.
  std::optional<std::string> warning;
};

/// s[m] = range_profile(H(., m * subsample))[bin]. `subsample` counts original
/// OFDM symbols and must be a multiple of the cube's symbol stride.
/// predicted_spread_hz only feeds the aliasing warning; pass 0 to skip it.
SlowTimeProfile slow_time_extract(const ChannelEstimateCube &est, std::size_t bin,
                                  std::size_t subsample, double predicted_spread_hz = 0.0);

/// estimate_channel -> detect_target_bin -> slow_time_extract.
SlowTimeProfile extract_profile(const SlowTimeCube &cube, std::size_t subsample,
                                double predicted_spread_hz = 0.0);

enum class Window { Rect, Hann };

std::string_view to_string(Window w);
Window parse_window(std::string_view text);

/// Rect is all ones. Hann uses sin^2(pi (n + 1) / (N + 1)), which has no zero
/// samples so windowed data can be divided back out.
std::vector<double> make_window(Window w, std::size_t n);

struct DopplerSpectrum {
  /// DC-centred axis over (-fs/2, fs/2].
  std::vector<double> freqs_hz;
  /// FFT of the windowed profile divided by the window sum, so a unit tone
  /// has magnitude one.
  std::vector<cd> values;
  Window window{Window::Hann};
  std::size_t n_samples{0};
  double sample_rate_hz{0.0};

  std::size_t n_fft() const { return values.size(); }
  double bin_hz() const { return sample_rate_hz / static_cast<double>(values.size()); }
  std::size_t dc_index() const { return (values.size() - 1) / 2; }
  double observation_s() const { return static_cast<double>(n_samples) / sample_rate_hz; }
  std::vector<double> magnitude() const;
};

/// n_fft = 0 picks the next power of two at or above 4 x profile length.
DopplerSpectrum doppler_spectrum(const SlowTimeProfile &profile, std::size_t n_fft = 0,
                                 Window window = Window::Hann);

struct Spectrogram {
  std::vector<double> times_s; // frame centres
  std::vector<double> freqs_hz;
  std::vector<double> magnitude; // frame-major, n_frames x n_freqs
  std::size_t frame_len{0};
  std::size_t hop{0};
  Window window{Window::Hann};

  std::size_t n_frames() const { return times_s.size(); }
  std::size_t n_freqs() const { return freqs_hz.size(); }
  std::span<const double> frame(std::size_t i) const {
    return {magnitude.data() + i * freqs_hz.size(), freqs_hz.size()};
  }
};

/// STFT magnitude with frame_len-point frames, divided by the window sum
/// (no per-frame normalization).
Spectrogram spectrogram(const SlowTimeProfile &profile, std::size_t frame_len, std::size_t overlap,
                        Window window = Window::Hann);

struct LineOptions {
  double threshold_db{15.0};
  /// The floor never sits further than this below the strongest bin.
  double dynamic_range_db{100.0};
  /// Allowed -6 dB width relative to the window mainlobe.
  double width_tolerance{1.5};
  double periodicity_min{0.8};
  double periodicity_dip{0.25};
};

struct LineAnalysis {
  std::vector<double> lines_hz;
  std::vector<double> amplitudes;
  double spacing_hz{0.0};
  double spread_hz{0.0};
  double noise_floor{0.0};
  bool resolved{false};
  /// Periodicity score at the estimated line spacing (0 when not evaluated).
  double periodicity{0.0};
};

/// Peaks above the noise floor (median magnitude) by threshold_db. Spacing is
/// a least-squares fit over the detected comb seeded by the median gap.
/// `resolved` requires two or more lines, spacing of at least two Doppler
/// resolution cells (2 / observation time) and a slow-time autocorrelation that
/// repeats at 1 / spacing.
LineAnalysis detect_lines(const DopplerSpectrum &spec, const LineOptions &options = {});

/// a_k = (1/P) sum_{n<P} x[n] exp(-j 2 pi k n / P) for k = 0..P-1, one period
/// taken from the start of the profile.
std::vector<cd> fourier_line_oracle(const SlowTimeProfile &profile, std::size_t period_samples);

struct SpreadOptions {
  /// Comb points below floor + margin do not count as lines.
  double margin_db{10.0};
  /// Lines within this range of the strongest sideband define the plateau.
  double plateau_db{20.0};
  /// Edge level relative to the plateau median.
  double edge_db{-9.54};
};

struct SpreadResult {
  double spread_hz{0.0};
  double lower_edge_hz{0.0};
  double upper_edge_hz{0.0};
  double center_hz{0.0};
  /// At least one side had a single plateau line, so its edge is quantized to
  /// the line spacing.
  bool below_spacing{false};
};

/// Two-sided width of the comb envelope around the strongest line. The edge
/// on each side is where the envelope, interpolated in dB between comb
/// points, drops edge_db below the plateau.
SpreadResult measure_spread(const DopplerSpectrum &spec, double spacing_hz,
                            const SpreadOptions &options = {});

/// Runs detect_lines first. A lone DC line gives zero spread; any other
/// unresolved spectrum throws std::domain_error.
SpreadResult measure_spread(const DopplerSpectrum &spec, const SpreadOptions &options = {},
                            const LineOptions &line_options = {});

} // namespace icas
