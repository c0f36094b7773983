#include "icas/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icas {

namespace {

constexpr char kMagic[8] = {'I', 'C', 'A', 'S', 'C', 'U', 'B', 'E'};

template <typename T> void put_le(std::vector<unsigned char> &buf, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T> T get_le(const unsigned char *p) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

std::ofstream open_out(const std::string &path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string &text, const std::string &where) {
  double v = 0.0;
  const auto *end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::runtime_error(where + ": cannot parse number '" + text + "'");
  }
  return v;
}

// Data rows of a CSV with '#' comments and one header row.
std::vector<std::vector<std::string>> read_rows(const std::string &path, std::string_view header) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool seen_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_header) {
      if (line != header) {
        throw std::runtime_error(path + ": expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    rows.push_back(split(line, ','));
  }
  if (!seen_header) throw std::runtime_error(path + ": missing header row");
  return rows;
}

} // namespace

std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string &path, std::string_view text) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_cube(const std::string &path, const SlowTimeCube &cube, std::uint64_t config_hash) {
  if (cube.y.size() != cube.n_carriers * cube.n_symbols) {
    throw std::invalid_argument("write_cube: cube data size does not match its dimensions");
  }
  std::vector<unsigned char> buf(kMagic, kMagic + 8);
  put_le(buf, kCubeVersion);
  put_le(buf, static_cast<std::uint32_t>(kCubeHeaderBytes));
  put_le(buf, static_cast<std::uint64_t>(cube.n_carriers));
  put_le(buf, static_cast<std::uint64_t>(cube.n_symbols));
  put_le(buf, cube.symbol_rate_hz);
  put_le(buf, cube.config.center_freq_hz);
  put_le(buf, static_cast<std::uint32_t>(cube.symbol_stride));
  put_le(buf, std::uint32_t{0});
  put_le(buf, config_hash);
  buf.reserve(kCubeHeaderBytes + cube.y.size() * 8);
  for (const auto &v : cube.y) {
    put_le(buf, static_cast<float>(v.real()));
    put_le(buf, static_cast<float>(v.imag()));
  }
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

CubeData read_cube(const std::string &path) {
  const std::string raw = read_text_file(path);
  const auto *p = reinterpret_cast<const unsigned char *>(raw.data());
  if (raw.size() < kCubeHeaderBytes || std::memcmp(p, kMagic, 8) != 0) {
    throw std::runtime_error(path + ": not a cube file");
  }
  if (get_le<std::uint32_t>(p + 8) != kCubeVersion) {
    throw std::runtime_error(path + ": unsupported cube version");
  }
  const auto header_bytes = get_le<std::uint32_t>(p + 12);
  if (header_bytes < kCubeHeaderBytes) throw std::runtime_error(path + ": bad header size");
  CubeData d;
  d.header.n_carriers = get_le<std::uint64_t>(p + 16);
  d.header.n_symbols = get_le<std::uint64_t>(p + 24);
  d.header.symbol_rate_hz = get_le<double>(p + 32);
  d.header.center_freq_hz = get_le<double>(p + 40);
  d.header.symbol_stride = get_le<std::uint32_t>(p + 48);
  d.header.flags = get_le<std::uint32_t>(p + 52);
  d.header.config_hash = get_le<std::uint64_t>(p + 56);
  const std::uint64_t count = d.header.n_carriers * d.header.n_symbols;
  if (raw.size() != header_bytes + count * 8) {
    throw std::runtime_error(path + ": file size does not match the header dimensions");
  }
  d.y.resize(count);
  const unsigned char *q = p + header_bytes;
  for (std::uint64_t i = 0; i < count; ++i, q += 8) {
    d.y[i] = {get_le<float>(q), get_le<float>(q + 4)};
  }
  return d;
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_hash(std::uint64_t h) {
  std::array<char, 17> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + 16, h, 16);
  std::string s(buf.data(), res.ptr);
  return std::string(16 - s.size(), '0') + s;
}

void write_csv_preamble(std::ostream &out, std::uint64_t config_hash) {
  out << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
  out << "# config_hash: " << format_hash(config_hash) << '\n';
}

void write_sweep_csv(const std::string &path, const SweepRecord &record, std::uint64_t config_hash) {
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "label,angle_deg,pol,freq_hz,re,im\n";
  const char *label = record.label == SweepLabel::DutBg ? "DUT_BG" : "BG";
  for (std::size_t a = 0; a < record.angles_deg.size(); ++a) {
    for (Pol pol : kAllPols) {
      const auto tr = record.trace(a, pol);
      for (std::size_t k = 0; k < tr.size(); ++k) {
        out << label << ',' << format_number(record.angles_deg[a]) << ',' << to_string(pol) << ','
            << format_number(record.freqs_hz[k]) << ',' << format_number(tr[k].real()) << ','
            << format_number(tr[k].imag()) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

SweepRecord read_sweep_csv(const std::string &path) {
  const auto rows = read_rows(path, "label,angle_deg,pol,freq_hz,re,im");
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");
  SweepRecord rec;
  const std::string &label = rows.front()[0];
  if (label == "DUT_BG") {
    rec.label = SweepLabel::DutBg;
  } else if (label == "BG") {
    rec.label = SweepLabel::Bg;
  } else {
    throw std::runtime_error(path + ": unknown label '" + label + "'");
  }
  // Rows are ordered angle, pol, freq; recover the grids first.
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != 6) throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " needs 6 fields");
    if (rows[r][0] != label) throw std::runtime_error(path + ": mixed labels");
  }
  const std::string where = path;
  const double a0 = parse_number(rows[0][1], where);
  for (const auto &row : rows) {
    if (parse_number(row[1], where) != a0 || row[2] != "HH") break;
    rec.freqs_hz.push_back(parse_number(row[3], where));
  }
  const std::size_t nf = rec.freqs_hz.size();
  const std::size_t per_angle = nf * kAllPols.size();
  if (nf == 0 || rows.size() % per_angle != 0) {
    throw std::runtime_error(path + ": rows do not form a complete angle x pol x freq grid");
  }
  const std::size_t na = rows.size() / per_angle;
  rec.s21.resize(rows.size());
  for (std::size_t a = 0; a < na; ++a) {
    rec.angles_deg.push_back(parse_number(rows[a * per_angle][1], where));
    for (std::size_t p = 0; p < kAllPols.size(); ++p) {
      for (std::size_t k = 0; k < nf; ++k) {
        const std::size_t r = a * per_angle + p * nf + k;
        const auto &row = rows[r];
        if (parse_number(row[1], where) != rec.angles_deg[a] || parse_pol(row[2]) != kAllPols[p] ||
            parse_number(row[3], where) != rec.freqs_hz[k]) {
          throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " is out of grid order");
        }
        rec.s21[r] = {parse_number(row[4], where), parse_number(row[5], where)};
      }
    }
  }
  return rec;
}

void write_response_csv(const std::string &path, std::span<const double> freqs_hz,
                        std::span<const cd> response, std::uint64_t config_hash) {
  if (freqs_hz.size() != response.size()) {
    throw std::invalid_argument("write_response_csv: length mismatch");
  }
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "freq_hz,re,im\n";
  for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
    out << format_number(freqs_hz[k]) << ',' << format_number(response[k].real()) << ','
        << format_number(response[k].imag()) << '\n';
  }
}

ResponseTable read_response_csv(const std::string &path) {
  ResponseTable t;
  for (const auto &row : read_rows(path, "freq_hz,re,im")) {
    if (row.size() != 3) throw std::runtime_error(path + ": rows need 3 fields");
    t.freqs_hz.push_back(parse_number(row[0], path));
    t.response.emplace_back(parse_number(row[1], path), parse_number(row[2], path));
  }
  return t;
}

void write_spectrum_csv(const std::string &path, const DopplerSpectrum &spec, std::uint64_t config_hash) {
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "# window: " << to_string(spec.window) << ", samples: " << spec.n_samples
      << ", sample_rate_hz: " << format_number(spec.sample_rate_hz) << '\n';
  out << "freq_hz,magnitude,magnitude_db,re,im\n";
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    const double m = std::abs(spec.values[i]);
    out << format_number(spec.freqs_hz[i]) << ',' << format_number(m) << ','
        << format_number(m > 0.0 ? 20.0 * std::log10(m) : -400.0) << ','
        << format_number(spec.values[i].real()) << ',' << format_number(spec.values[i].imag()) << '\n';
  }
}

void write_spectrogram_csv(const std::string &path, const Spectrogram &sg, std::uint64_t config_hash) {
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "# window: " << to_string(sg.window) << ", frame_len: " << sg.frame_len << ", hop: " << sg.hop << '\n';
  out << "time_s,freq_hz,magnitude\n";
  for (std::size_t f = 0; f < sg.n_frames(); ++f) {
    const auto fr = sg.frame(f);
    const std::string t = format_number(sg.times_s[f]);
    for (std::size_t i = 0; i < fr.size(); ++i) {
      out << t << ',' << format_number(sg.freqs_hz[i]) << ',' << format_number(fr[i]) << '\n';
    }
  }
}

void write_lines_csv(const std::string &path, const LineAnalysis &lines, const SpreadResult *spread,
                     std::uint64_t config_hash) {
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "# status: " << (lines.resolved ? "resolved" : "unresolved") << '\n';
  out << "# spacing_hz: " << format_number(lines.spacing_hz) << '\n';
  out << "# line_span_hz: " << format_number(lines.spread_hz) << '\n';
  out << "# periodicity: " << format_number(lines.periodicity) << '\n';
  if (spread) {
    out << "# spread_hz: " << format_number(spread->spread_hz) << '\n';
    out << "# lower_edge_hz: " << format_number(spread->lower_edge_hz) << '\n';
    out << "# upper_edge_hz: " << format_number(spread->upper_edge_hz) << '\n';
  }
  out << "line_index,freq_hz,amplitude\n";
  for (std::size_t i = 0; i < lines.lines_hz.size(); ++i) {
    out << i << ',' << format_number(lines.lines_hz[i]) << ',' << format_number(lines.amplitudes[i]) << '\n';
  }
}

void write_map_csv(const std::string &path, const ReflectivityMap &map, std::uint64_t config_hash) {
  auto out = open_out(path);
  write_csv_preamble(out, config_hash);
  out << "# reference_distance_m: " << format_number(map.reference_distance_m)
      << ", reference_power: " << format_number(map.reference_power) << '\n';
  out << "beta_deg,freq_hz,pol,reflectivity_db\n";
  for (std::size_t a = 0; a < map.angles_deg.size(); ++a) {
    for (Pol pol : kAllPols) {
      for (std::size_t k = 0; k < map.freqs_hz.size(); ++k) {
        out << format_number(map.angles_deg[a]) << ',' << format_number(map.freqs_hz[k]) << ','
            << to_string(pol) << ',' << format_number(map.at(a, pol, k)) << '\n';
      }
    }
  }
}

} // namespace icas
