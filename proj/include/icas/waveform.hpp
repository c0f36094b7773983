#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace icas {

using cd = std::complex<double>;

/// OFDM sounding parameters. Carrier k (0-based) sits at
/// center_freq + (k - n_carriers/2) * spacing. Active carriers form a centered
/// contiguous block; when the guard count is odd the extra guard goes to the top.
struct OfdmConfig {
  double center_freq_hz{3.7e9};
  double bandwidth_hz{200e6};
  std::size_t n_carriers{1600};
  std::size_t n_active{1280};
  double symbol_duration_s{8e-6};
  /// Every pilot_stride-th active carrier is a pilot; 0 disables pilots.
  std::size_t pilot_stride{10};
  std::size_t subsample_factor{8};

  double carrier_spacing_hz() const { return bandwidth_hz / static_cast<double>(n_carriers); }
  double symbol_rate_hz() const { return 1.0 / symbol_duration_s; }
  std::size_t first_active() const { return (n_carriers - n_active) / 2; }
  double carrier_frequency(std::size_t k) const;
  double wavelength() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool operator==(const OfdmConfig &) const = default;
};

/// One reference OFDM symbol in the frequency domain.
struct ReferenceSymbol {
  OfdmConfig config;
  std::vector<cd> x;
  std::vector<bool> active;
  std::vector<bool> pilot;

  /// Active carriers that are not pilots, ascending.
  std::vector<std::size_t> data_carriers() const;
  std::vector<std::size_t> active_carriers() const;
};

/// Newman phases pi (k-1)^2 / n for k = 1..n.
std::vector<double> newman_phases(std::size_t n);

ReferenceSymbol build_reference(const OfdmConfig &config);

/// Inverse DFT of the carrier amplitudes, n_carriers samples, no cyclic prefix.
std::vector<cd> time_domain_symbol(const ReferenceSymbol &ref);

/// Forward counterpart of time_domain_symbol, in carrier order.
std::vector<cd> symbol_spectrum(std::span<const cd> samples);

/// Peak-to-RMS amplitude ratio.
double crest_factor(std::span<const cd> samples);

} // namespace icas
