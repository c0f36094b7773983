#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "icas/mdproc.hpp"
#include "icas/reflproc.hpp"
#include "icas/scene.hpp"
#include "icas/waveform.hpp"

namespace icas {

/// Invalid configuration. field() is the dotted JSON path, e.g. "ofdm.n_active".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string &message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

enum class Scenario { MicroDoppler, VnaSweep };

std::string_view to_string(Scenario s);

struct MdGeometry {
  double beta_deg{60.0};
  /// Target-to-antenna distance on both legs [m].
  double range_m{50.0};
  /// When non-empty, simulate-md produces one cube per entry instead of beta_deg.
  std::vector<double> beta_list_deg;
};

struct MdSettings {
  /// Slow-time samples after subsampling.
  std::size_t n_symbols{16875};
  std::size_t subsample{8};
  std::size_t n_fft{0};
  Window window{Window::Hann};
  double threshold_db{15.0};
  std::size_t spectrogram_frame{256};
  std::size_t spectrogram_overlap{192};
  Window spectrogram_window{Window::Hann};
};

struct VnaSettings {
  double f_start_hz{2e9};
  double f_stop_hz{18e9};
  std::size_t n_freqs{1601};
  double beta_start_deg{10.0};
  double beta_step_deg{5.0};
  double beta_stop_deg{180.0};
  double range_m{3.0};
  double bg_drift{0.0};
  double turntable_deg{0.0};
  /// Empty: use the built-in smooth ripple. Otherwise a CSV with freq_hz,re,im.
  std::string system_response_file;
};

struct ReflSettings {
  GateSpec gate;
  double display_f_min_hz{2e9};
  double display_f_max_hz{10e9};
};

struct RunConfig {
  Scenario scenario{Scenario::MicroDoppler};
  std::uint64_t seed{1};
  std::string output_dir{"out"};
  OfdmConfig ofdm;
  Scene scene;
  double noise_sigma{0.0};
  MdGeometry geometry;
  MdSettings md;
  VnaSettings vna;
  ReflSettings refl;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  std::vector<double> md_betas() const;
  std::vector<double> vna_betas() const;
};

/// Hub scatterer plus one two-blade propeller whose axis is normal to the
/// flyover bistatic plane, seen from 50 m.
RunConfig default_md_config();
/// Polarimetric drone surrogate with chamber clutter 7-10 m from the target.
RunConfig default_vna_config();

/// Missing keys keep their defaults for the chosen scenario; unknown keys are errors.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::string &path);
/// Canonical JSON (sorted keys, every field present).
std::string serialize_config(const RunConfig &config);
/// FNV-1a 64 of serialize_config.
std::uint64_t config_hash(const RunConfig &config);
std::uint64_t fnv1a64(std::string_view bytes);

} // namespace icas
