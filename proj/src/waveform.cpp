#include "icas/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "icas/fft.hpp"
#include "icas/geometry.hpp"

namespace icas {

double OfdmConfig::carrier_frequency(std::size_t k) const {
  return center_freq_hz +
         (static_cast<double>(k) - static_cast<double>(n_carriers / 2)) * carrier_spacing_hz();
}

double OfdmConfig::wavelength() const { return wavelength_of(center_freq_hz); }

void OfdmConfig::validate() const {
  auto fail = [](const std::string &field, const std::string &why) {
    throw std::invalid_argument("ofdm." + field + ": " + why);
  };
  if (!(center_freq_hz > 0.0) || !std::isfinite(center_freq_hz)) fail("center_freq_hz", "must be > 0");
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) fail("bandwidth_hz", "must be > 0");
  if (!(symbol_duration_s > 0.0) || !std::isfinite(symbol_duration_s)) fail("symbol_duration_s", "must be > 0");
  if (n_carriers < 1) fail("n_carriers", "must be >= 1");
  if (n_active < 1 || n_active > n_carriers) fail("n_active", "must be in [1, n_carriers]");
  if (subsample_factor < 1) fail("subsample_factor", "must be >= 1");
  if (bandwidth_hz / 2.0 >= center_freq_hz) fail("bandwidth_hz", "must be below twice the center frequency");
  const double product = carrier_spacing_hz() * symbol_duration_s;
  if (std::abs(product - 1.0) > 1e-9) {
    fail("symbol_duration_s", "carrier spacing (" + std::to_string(carrier_spacing_hz()) +
                                  " Hz) times symbol duration must equal 1, got " +
                                  std::to_string(product));
  }
}

std::vector<std::size_t> ReferenceSymbol::data_carriers() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (active[k] && !pilot[k]) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> ReferenceSymbol::active_carriers() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (active[k]) out.push_back(k);
  }
  return out;
}

std::vector<double> newman_phases(std::size_t n) {
  if (n < 1) {
    throw std::invalid_argument("newman_phases: n must be >= 1");
  }
  std::vector<double> phases(n);
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    phases[k] = kPi * kk * kk / dn;
  }
  return phases;
}

ReferenceSymbol build_reference(const OfdmConfig &config) {
  config.validate();
  ReferenceSymbol ref;
  ref.config = config;
  ref.x.assign(config.n_carriers, cd{0.0, 0.0});
  ref.active.assign(config.n_carriers, false);
  ref.pilot.assign(config.n_carriers, false);
  const auto phases = newman_phases(config.n_active);
  const std::size_t first = config.first_active();
  for (std::size_t j = 0; j < config.n_active; ++j) {
    const std::size_t k = first + j;
    ref.x[k] = std::polar(1.0, phases[j]);
    ref.active[k] = true;
    ref.pilot[k] = config.pilot_stride > 0 && j % config.pilot_stride == 0;
  }
  return ref;
}

std::vector<cd> time_domain_symbol(const ReferenceSymbol &ref) {
  const std::size_t n = ref.x.size();
  // Carrier k has baseband index k - n/2; rotate it into FFT order.
  std::vector<cd> bins(n);
  for (std::size_t k = 0; k < n; ++k) {
    bins[(k + n - n / 2) % n] = ref.x[k];
  }
  return fft::inverse(bins);
}

std::vector<cd> symbol_spectrum(std::span<const cd> samples) {
  const std::size_t n = samples.size();
  const auto bins = fft::forward(samples);
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = bins[(k + n - n / 2) % n];
  }
  return out;
}

double crest_factor(std::span<const cd> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("crest_factor: empty signal");
  }
  double peak = 0.0, power = 0.0;
  for (const auto &s : samples) {
    const double p = std::norm(s);
    peak = std::max(peak, p);
    power += p;
  }
  if (power == 0.0) {
    throw std::invalid_argument("crest_factor: all-zero signal");
  }
  return std::sqrt(peak / (power / static_cast<double>(samples.size())));
}

} // namespace icas
