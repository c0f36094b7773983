#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "icas/mdproc.hpp"
#include "icas/reflproc.hpp"
#include "icas/simulate.hpp"

namespace icas {

inline constexpr std::string_view kToolName = "icas-sig";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Cube file layout (little-endian):
///
///   offset size
///        0    8  magic "ICASCUBE"
///        8    4  u32 format version (1)
///       12    4  u32 header size (64)
///       16    8  u64 carriers per symbol
///       24    8  u64 symbols stored
///       32    8  f64 OFDM symbol rate [Hz]
///       40    8  f64 centre frequency [Hz]
///       48    4  u32 symbol stride (row m is OFDM symbol m * stride)
///       52    4  u32 flags (0)
///       56    8  u64 config hash
///       64  ...  complex64 samples (re, im as f32), symbol-major
struct CubeHeader {
  std::uint64_t n_carriers{0};
  std::uint64_t n_symbols{0};
  double symbol_rate_hz{0.0};
  double center_freq_hz{0.0};
  std::uint32_t symbol_stride{1};
  std::uint32_t flags{0};
  std::uint64_t config_hash{0};
};

inline constexpr std::uint32_t kCubeVersion = 1;
inline constexpr std::size_t kCubeHeaderBytes = 64;

void write_cube(const std::string &path, const SlowTimeCube &cube, std::uint64_t config_hash);

/// Header and samples. The OFDM configuration and geometry are not part of
/// the binary file; callers take them from the sidecar.
struct CubeData {
  CubeHeader header;
  std::vector<cd> y;
};
CubeData read_cube(const std::string &path);

/// Shortest round-trip decimal form.
std::string format_number(double v);
std::string format_hash(std::uint64_t h);

/// "# tool: ..." and "# config_hash: ..." lines.
void write_csv_preamble(std::ostream &out, std::uint64_t config_hash);

/// label,angle_deg,pol,freq_hz,re,im
void write_sweep_csv(const std::string &path, const SweepRecord &record, std::uint64_t config_hash);
SweepRecord read_sweep_csv(const std::string &path);

/// freq_hz,re,im
void write_response_csv(const std::string &path, std::span<const double> freqs_hz,
                        std::span<const cd> response, std::uint64_t config_hash);
struct ResponseTable {
  std::vector<double> freqs_hz;
  std::vector<cd> response;
};
ResponseTable read_response_csv(const std::string &path);

/// freq_hz,magnitude,magnitude_db,re,im
void write_spectrum_csv(const std::string &path, const DopplerSpectrum &spec, std::uint64_t config_hash);
/// time_s,freq_hz,magnitude (long format)
void write_spectrogram_csv(const std::string &path, const Spectrogram &sg, std::uint64_t config_hash);
/// Summary block as comment lines, then line_index,freq_hz,amplitude.
void write_lines_csv(const std::string &path, const LineAnalysis &lines, const SpreadResult *spread,
                     std::uint64_t config_hash);
/// beta_deg,freq_hz,pol,reflectivity_db
void write_map_csv(const std::string &path, const ReflectivityMap &map, std::uint64_t config_hash);

/// Whole file as a string; throws std::runtime_error when unreadable.
std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, std::string_view text);

} // namespace icas
