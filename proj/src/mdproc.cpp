#include "icas/mdproc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "icas/fft.hpp"
#include "icas/geometry.hpp"
#include "icas/parallel.hpp"

namespace icas {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) {
    return 0.0;
  }
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// exp(+j 2 pi num / den) with the integer ratio reduced first.
cd twiddle(std::size_t num, std::size_t den) {
  const double arg = 2.0 * kPi * static_cast<double>(num % den) / static_cast<double>(den);
  return {std::cos(arg), std::sin(arg)};
}

// DC-centred index i <-> FFT bin.
std::size_t fft_bin_of(std::size_t i, std::size_t n) {
  const std::size_t dc = (n - 1) / 2;
  return (i + n - dc) % n;
}

std::vector<double> centred_axis(std::size_t n, double fs) {
  std::vector<double> f(n);
  const double dc = static_cast<double>((n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = (static_cast<double>(i) - dc) * fs / static_cast<double>(n);
  }
  return f;
}

double to_db(double v) { return 20.0 * std::log10(v); }

} // namespace

ChannelEstimateCube estimate_channel(const SlowTimeCube &cube, const ReferenceSymbol &ref) {
  if (!(cube.config == ref.config)) {
    throw std::invalid_argument("estimate_channel: cube and reference use different OFDM configurations");
  }
  if (cube.n_carriers != ref.x.size() || cube.y.size() != cube.n_symbols * cube.n_carriers) {
    throw std::invalid_argument("estimate_channel: cube dimensions do not match the reference");
  }
  ChannelEstimateCube est;
  est.config = cube.config;
  est.carriers = ref.data_carriers();
  for (std::size_t k : est.carriers) {
    if (std::abs(ref.x[k]) == 0.0) {
      throw std::invalid_argument("estimate_channel: reference carrier " + std::to_string(k) +
                                  " has zero magnitude");
    }
  }
  est.n_symbols = cube.n_symbols;
  est.symbol_stride = cube.symbol_stride;
  est.symbol_rate_hz = cube.symbol_rate_hz;
  const std::size_t nc = est.carriers.size();
  est.h.resize(cube.n_symbols * nc);
  parallel_for(cube.n_symbols, [&](std::size_t m) {
    const auto y = cube.symbol(m);
    for (std::size_t j = 0; j < nc; ++j) {
      est.h[m * nc + j] = y[est.carriers[j]] / ref.x[est.carriers[j]];
    }
  });
  return est;
}

RangeProfile range_profile(std::span<const cd> h, double carrier_spacing_hz) {
  if (h.size() < 8) {
    throw std::invalid_argument("range_profile: need at least 8 carriers");
  }
  RangeProfile rp;
  rp.bins = fft::inverse(h);
  std::size_t best = 0;
  for (std::size_t n = 1; n < rp.bins.size(); ++n) {
    if (std::abs(rp.bins[n]) > std::abs(rp.bins[best])) best = n;
  }
  rp.peak_bin = best;
  rp.bin_delay_s = 1.0 / (static_cast<double>(h.size()) * carrier_spacing_hz);
  return rp;
}

RangeProfile range_profile(const ChannelEstimateCube &est, std::size_t m) {
  if (m >= est.n_symbols) {
    throw std::out_of_range("range_profile: symbol index out of range");
  }
  const std::size_t n = est.config.n_active;
  const std::size_t first = est.config.first_active();
  std::vector<cd> block(n, cd{0.0, 0.0});
  const auto row = est.row(m);
  for (std::size_t j = 0; j < est.carriers.size(); ++j) {
    block[est.carriers[j] - first] = row[j];
  }
  auto rp = range_profile(block, est.config.carrier_spacing_hz());
  const double scale = static_cast<double>(n) / static_cast<double>(est.carriers.size());
  for (auto &b : rp.bins) b *= scale;
  return rp;
}

std::size_t detect_target_bin(const ChannelEstimateCube &est, std::size_t max_symbols) {
  if (est.n_symbols == 0 || est.carriers.empty()) {
    throw std::invalid_argument("detect_target_bin: empty estimate");
  }
  const std::size_t count = std::min(est.n_symbols, std::max<std::size_t>(1, max_symbols));
  std::vector<double> acc(est.config.n_active, 0.0);
  for (std::size_t m = 0; m < count; ++m) {
    const auto rp = range_profile(est, m);
    for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += std::abs(rp.bins[n]);
  }
  return static_cast<std::size_t>(std::max_element(acc.begin(), acc.end()) - acc.begin());
}

SlowTimeProfile slow_time_extract(const ChannelEstimateCube &est, std::size_t bin,
                                  std::size_t subsample, double predicted_spread_hz) {
  const std::size_t n = est.config.n_active;
  if (subsample < 1) {
    throw std::invalid_argument("slow_time_extract: subsample must be >= 1");
  }
  if (bin >= n) {
    throw std::out_of_range("slow_time_extract: range bin " + std::to_string(bin) +
                            " outside [0, " + std::to_string(n) + ")");
  }
  if (subsample % est.symbol_stride != 0) {
    throw std::invalid_argument("slow_time_extract: subsample " + std::to_string(subsample) +
                                " is not a multiple of the cube symbol stride " +
                                std::to_string(est.symbol_stride));
  }
  const std::size_t step = subsample / est.symbol_stride;
  const std::size_t count = (est.n_symbols + step - 1) / step;
  const std::size_t first = est.config.first_active();
  std::vector<cd> kernel(est.carriers.size());
  const double scale = 1.0 / static_cast<double>(est.carriers.size());
  for (std::size_t j = 0; j < kernel.size(); ++j) {
    kernel[j] = scale * twiddle((est.carriers[j] - first) * bin, n);
  }

  SlowTimeProfile p;
  p.sample_rate_hz = est.symbol_rate_hz / static_cast<double>(subsample);
  p.range_bin = bin;
  p.samples.resize(count);
  parallel_for(count, [&](std::size_t i) {
    const auto row = est.row(i * step);
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < kernel.size(); ++j) {
      re += row[j].real() * kernel[j].real() - row[j].imag() * kernel[j].imag();
      im += row[j].real() * kernel[j].imag() + row[j].imag() * kernel[j].real();
    }
    p.samples[i] = {re, im};
  });
  if (predicted_spread_hz > p.sample_rate_hz) {
    p.warning = "predicted micro-Doppler spread " + std::to_string(predicted_spread_hz) +
                " Hz exceeds the slow-time sample rate " + std::to_string(p.sample_rate_hz) +
                " Hz; the spectrum will alias";
  }
  return p;
}

SlowTimeProfile extract_profile(const SlowTimeCube &cube, std::size_t subsample,
                                double predicted_spread_hz) {
  const auto est = estimate_channel(cube, build_reference(cube.config));
  return slow_time_extract(est, detect_target_bin(est), subsample, predicted_spread_hz);
}

std::string_view to_string(Window w) { return w == Window::Rect ? "rect" : "hann"; }

Window parse_window(std::string_view raw) {
  std::string text(raw);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (text == "rect" || text == "rectangular" || text == "flat") return Window::Rect;
  if (text == "hann" || text == "hanning") return Window::Hann;
  throw std::invalid_argument("unknown window '" + std::string(raw) + "' (rect or hann)");
}

std::vector<double> make_window(Window w, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (w == Window::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      const double s = std::sin(kPi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
      out[i] = s * s;
    }
  }
  return out;
}

std::vector<double> DopplerSpectrum::magnitude() const {
  std::vector<double> m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m[i] = std::abs(values[i]);
  return m;
}

DopplerSpectrum doppler_spectrum(const SlowTimeProfile &profile, std::size_t n_fft, Window window) {
  const std::size_t n = profile.samples.size();
  if (n == 0) {
    throw std::invalid_argument("doppler_spectrum: empty profile");
  }
  if (!(profile.sample_rate_hz > 0.0)) {
    throw std::invalid_argument("doppler_spectrum: sample rate must be > 0");
  }
  if (n_fft == 0) n_fft = next_pow2(4 * n);
  if (n_fft < n) {
    throw std::invalid_argument("doppler_spectrum: n_fft " + std::to_string(n_fft) +
                                " is shorter than the profile (" + std::to_string(n) + ")");
  }
  const auto w = make_window(window, n);
  double wsum = 0.0;
  std::vector<cd> buf(n_fft, cd{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = profile.samples[i] * w[i];
    wsum += w[i];
  }
  fft::forward(buf, buf);
  DopplerSpectrum spec;
  spec.window = window;
  spec.n_samples = n;
  spec.sample_rate_hz = profile.sample_rate_hz;
  spec.freqs_hz = centred_axis(n_fft, profile.sample_rate_hz);
  spec.values.resize(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    spec.values[i] = buf[fft_bin_of(i, n_fft)] / wsum;
  }
  return spec;
}

Spectrogram spectrogram(const SlowTimeProfile &profile, std::size_t frame_len, std::size_t overlap,
                        Window window) {
  const std::size_t n = profile.samples.size();
  if (frame_len < 1 || frame_len > n) {
    throw std::invalid_argument("spectrogram: frame length must be in [1, profile length]");
  }
  if (overlap >= frame_len) {
    throw std::invalid_argument("spectrogram: overlap must be smaller than the frame length");
  }
  Spectrogram sg;
  sg.frame_len = frame_len;
  sg.hop = frame_len - overlap;
  sg.window = window;
  const std::size_t frames = 1 + (n - frame_len) / sg.hop;
  sg.freqs_hz = centred_axis(frame_len, profile.sample_rate_hz);
  sg.times_s.resize(frames);
  sg.magnitude.resize(frames * frame_len);
  const auto w = make_window(window, frame_len);
  double wsum = 0.0;
  for (double v : w) wsum += v;
  parallel_for(frames, [&](std::size_t f) {
    const std::size_t start = f * sg.hop;
    std::vector<cd> buf(frame_len);
    for (std::size_t i = 0; i < frame_len; ++i) buf[i] = profile.samples[start + i] * w[i];
    fft::forward(buf, buf);
    for (std::size_t i = 0; i < frame_len; ++i) {
      sg.magnitude[f * frame_len + i] = std::abs(buf[fft_bin_of(i, frame_len)]) / wsum;
    }
    sg.times_s[f] = (static_cast<double>(start) + 0.5 * static_cast<double>(frame_len - 1)) /
                    profile.sample_rate_hz;
  });
  return sg;
}

namespace {

double noise_floor_of(const std::vector<double> &mag, double dynamic_range_db) {
  const double peak = *std::max_element(mag.begin(), mag.end());
  return std::max(median_of(mag), peak * std::pow(10.0, -dynamic_range_db / 20.0));
}

// Profile recovered from the spectrum: undo the window-sum scaling, the
// shift and the window itself.
std::vector<cd> recover_profile(const DopplerSpectrum &spec) {
  const std::size_t nfft = spec.n_fft(), n = spec.n_samples;
  std::vector<cd> buf(nfft);
  for (std::size_t i = 0; i < nfft; ++i) buf[fft_bin_of(i, nfft)] = spec.values[i];
  fft::inverse(buf, buf);
  const auto w = make_window(spec.window, n);
  double wsum = 0.0;
  for (double v : w) wsum += v;
  std::vector<cd> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = buf[i] * wsum / w[i];
  return x;
}

// Unbiased, normalized autocorrelation of the mean-removed profile.
std::vector<double> autocorrelation(std::vector<cd> x) {
  const std::size_t n = x.size();
  cd mean{0.0, 0.0};
  for (const auto &v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<cd> buf(2 * n, cd{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) buf[i] = x[i] - mean;
  fft::forward(buf, buf);
  for (auto &v : buf) v = std::norm(v);
  fft::inverse(buf, buf);
  std::vector<double> rho(n, 0.0);
  const double r0 = buf[0].real();
  if (!(r0 > 0.0)) {
    return rho;
  }
  for (std::size_t t = 0; t < n; ++t) {
    rho[t] = buf[t].real() * static_cast<double>(n) / (static_cast<double>(n - t) * r0);
  }
  return rho;
}

double rho_at(const std::vector<double> &rho, double lag) {
  const auto i = static_cast<std::size_t>(std::floor(lag));
  const double f = lag - static_cast<double>(i);
  const std::size_t j = std::min(i + 1, rho.size() - 1);
  return (1.0 - f) * rho[i] + f * rho[j];
}

} // namespace

LineAnalysis detect_lines(const DopplerSpectrum &spec, const LineOptions &options) {
  if (spec.values.empty() || spec.n_samples == 0) {
    throw std::invalid_argument("detect_lines: empty spectrum");
  }
  const auto mag = spec.magnitude();
  const std::size_t nfft = mag.size();
  const double df = spec.bin_hz();
  const double t_obs = spec.observation_s();
  LineAnalysis out;
  out.noise_floor = noise_floor_of(mag, options.dynamic_range_db);
  const double threshold = out.noise_floor * std::pow(10.0, options.threshold_db / 20.0);

  const double mainlobe = spec.window == Window::Hann ? 2.0 / t_obs : 1.0 / t_obs;
  const double width_6db = spec.window == Window::Hann ? 2.0 / t_obs : 1.207 / t_obs;
  const auto half = static_cast<std::ptrdiff_t>(std::max(1.0, std::round(mainlobe / df)));
  const auto nn = static_cast<std::ptrdiff_t>(nfft);

  for (std::ptrdiff_t i = 0; i < nn; ++i) {
    const double v = mag[static_cast<std::size_t>(i)];
    if (v < threshold) continue;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nn - 1, i + half);
    if (v != *std::max_element(mag.begin() + lo, mag.begin() + hi + 1)) continue;
    // Leakage ridges and noise bumps are wider than a clean window mainlobe.
    std::ptrdiff_t l = i, r = i;
    while (l > 0 && mag[static_cast<std::size_t>(l)] >= v / 2.0) --l;
    while (r < nn - 1 && mag[static_cast<std::size_t>(r)] >= v / 2.0) ++r;
    if (static_cast<double>(r - l) * df > options.width_tolerance * width_6db + 2.0 * df) continue;
    out.lines_hz.push_back(spec.freqs_hz[static_cast<std::size_t>(i)]);
    out.amplitudes.push_back(v);
  }
  if (out.lines_hz.size() < 2) {
    return out;
  }
  out.spread_hz = out.lines_hz.back() - out.lines_hz.front();

  std::vector<double> gaps;
  for (std::size_t i = 1; i < out.lines_hz.size(); ++i) {
    gaps.push_back(out.lines_hz[i] - out.lines_hz[i - 1]);
  }
  double spacing = median_of(gaps);
  {
    // f_i = f_0 + k_i * spacing, k_i from the median-gap seed.
    double sk = 0, sf = 0, skk = 0, skf = 0;
    const double n = static_cast<double>(out.lines_hz.size());
    for (double f : out.lines_hz) {
      const double k = std::round((f - out.lines_hz.front()) / spacing);
      sk += k;
      sf += f;
      skk += k * k;
      skf += k * f;
    }
    const double den = n * skk - sk * sk;
    if (den > 0.0) spacing = (n * skf - sk * sf) / den;
  }
  out.spacing_hz = spacing;
  if (!(spacing >= 2.0 / t_obs)) {
    return out;
  }

  const double fs = spec.sample_rate_hz;
  const double period = fs / spacing;
  const auto rho = autocorrelation(recover_profile(spec));
  if (period + 1.0 >= static_cast<double>(rho.size())) {
    return out;
  }
  double best = -1.0;
  const double span = fs / static_cast<double>(spec.n_samples);
  for (int d = 0; d <= 20; ++d) {
    const double trial = spacing + span * (-1.0 + 0.1 * d);
    if (!(trial > 0.0)) continue;
    const double lag = fs / trial;
    if (lag + 1.0 >= static_cast<double>(rho.size())) continue;
    best = std::max(best, rho_at(rho, lag));
  }
  const auto last = static_cast<std::size_t>(std::floor(period));
  const double dip = *std::min_element(rho.begin() + 1, rho.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  out.periodicity = best;
  out.resolved = best >= options.periodicity_min && dip <= best - options.periodicity_dip;
  return out;
}

std::vector<cd> fourier_line_oracle(const SlowTimeProfile &profile, std::size_t period_samples) {
  if (period_samples < 1) {
    throw std::invalid_argument("fourier_line_oracle: period must be >= 1 sample");
  }
  if (profile.samples.size() < 2 * period_samples) {
    throw std::invalid_argument("fourier_line_oracle: profile must span at least two periods");
  }
  const std::size_t p = period_samples;
  std::vector<cd> a(p);
  for (std::size_t k = 0; k < p; ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t n = 0; n < p; ++n) {
      acc += profile.samples[n] * std::conj(twiddle(k * n, p));
    }
    a[k] = acc / static_cast<double>(p);
  }
  return a;
}

SpreadResult measure_spread(const DopplerSpectrum &spec, double spacing_hz,
                            const SpreadOptions &options) {
  if (!(spacing_hz > 0.0)) {
    throw std::invalid_argument("measure_spread: line spacing must be > 0");
  }
  const auto mag = spec.magnitude();
  const std::size_t nfft = mag.size();
  const double df = spec.bin_hz();
  const double floor = noise_floor_of(mag, 100.0);
  const double valid_level = floor * std::pow(10.0, options.margin_db / 20.0);
  const double floor_db = to_db(floor);

  const auto centre = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
  SpreadResult out;
  out.center_hz = spec.freqs_hz[centre];
  const auto hb = static_cast<std::ptrdiff_t>(
      std::max(1.0, std::round(static_cast<double>(nfft) / static_cast<double>(spec.n_samples))));
  const auto nn = static_cast<std::ptrdiff_t>(nfft);

  double edges[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    std::vector<double> env;
    for (std::size_t k = 0;; ++k) {
      const double f = out.center_hz + sign * static_cast<double>(k) * spacing_hz;
      const auto i = static_cast<std::ptrdiff_t>(centre) +
                     static_cast<std::ptrdiff_t>(std::llround(sign * static_cast<double>(k) * spacing_hz / df));
      if (i - hb < 0 || i + hb >= nn || std::abs(f) > spec.sample_rate_hz / 2.0) break;
      env.push_back(*std::max_element(mag.begin() + (i - hb), mag.begin() + (i + hb) + 1));
    }
    std::vector<double> db(env.size());
    for (std::size_t k = 0; k < env.size(); ++k) db[k] = to_db(env[k]);
    std::vector<double> sidebands;
    for (std::size_t k = 1; k < env.size(); ++k) {
      if (env[k] >= valid_level) sidebands.push_back(db[k]);
    }
    if (sidebands.empty()) continue;
    const double top = *std::max_element(sidebands.begin(), sidebands.end());
    std::vector<double> plateau;
    for (double v : sidebands) {
      if (v >= top - options.plateau_db) plateau.push_back(v);
    }
    const double level = median_of(plateau) + options.edge_db;
    std::size_t ka = 0;
    for (std::size_t k = 1; k < env.size(); ++k) {
      if (env[k] >= valid_level && db[k] >= level) ka = k;
    }
    if (plateau.size() == 1) {
      edges[side] = static_cast<double>(ka) * spacing_hz;
      out.below_spacing = true;
      continue;
    }
    const double a = db[ka];
    const double b = ka + 1 < env.size() ? std::max(db[ka + 1], floor_db) : floor_db;
    const double frac = a > b ? std::clamp((a - level) / (a - b), 0.0, 1.0) : 0.0;
    edges[side] = (static_cast<double>(ka) + frac) * spacing_hz;
  }
  out.upper_edge_hz = out.center_hz + edges[0];
  out.lower_edge_hz = out.center_hz - edges[1];
  out.spread_hz = edges[0] + edges[1];
  return out;
}

SpreadResult measure_spread(const DopplerSpectrum &spec, const SpreadOptions &options,
                            const LineOptions &line_options) {
  const auto lines = detect_lines(spec, line_options);
  if (!lines.resolved) {
    if (lines.lines_hz.size() <= 1) {
      SpreadResult r;
      if (!lines.lines_hz.empty()) {
        r.center_hz = r.lower_edge_hz = r.upper_edge_hz = lines.lines_hz.front();
      }
      if (lines.lines_hz.empty() || std::abs(r.center_hz) <= 2.0 / spec.observation_s()) {
        return r;
      }
    }
    throw std::domain_error("measure_spread: spectrum lines are not resolved");
  }
  return measure_spread(spec, lines.spacing_hz, options);
}

} // namespace icas
