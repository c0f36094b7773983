#include "icas/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "icas/parallel.hpp"

namespace icas {

namespace {

constexpr std::size_t kAnchorEvery = 128;

struct Path {
  cd amplitude;
  double delay_s;
};

Path path_of(const PointScatterer &s, const BistaticGeometry &geom, Pol pol) {
  const double d_tx = norm(s.position - geom.tx);
  const double d_rx = norm(s.position - geom.rx);
  if (!(d_tx > 0.0) || !(d_rx > 0.0)) {
    throw std::invalid_argument("scatterer coincides with an antenna");
  }
  return {s.coeff[pol] / (d_tx * d_rx), (d_tx + d_rx) / kSpeedOfLight};
}

bool is_uniform(std::span<const double> freqs, double &step) {
  if (freqs.size() < 2) {
    return false;
  }
  step = (freqs.back() - freqs.front()) / static_cast<double>(freqs.size() - 1);
  const double tol = 1e-9 * std::max(std::abs(freqs.front()), std::abs(freqs.back()));
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (std::abs(freqs[k] - (freqs.front() + static_cast<double>(k) * step)) > tol) {
      return false;
    }
  }
  return step != 0.0;
}

// exp(-j 2 pi f tau) with the cycle count reduced before the trig call.
cd unit_phasor(double f, double tau) {
  double cycles = f * tau;
  cycles -= std::floor(cycles);
  const double arg = -2.0 * kPi * cycles;
  return {std::cos(arg), std::sin(arg)};
}

void add_paths_direct(std::span<const double> freqs, const std::vector<Path> &paths,
                      std::span<cd> out) {
  for (const auto &path : paths) {
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      out[k] += path.amplitude * unit_phasor(freqs[k], path.delay_s);
    }
  }
}

// Uniform grid: each path is re-anchored with one trig call every
// kAnchorEvery points and advanced in between by tabulated powers of its
// per-step phasor. Products are written out so the loops vectorize and stay
// off the NaN-recovery path of std::complex multiplication.
void add_paths_uniform(double f0, double step, std::size_t n, const std::vector<Path> &paths,
                       std::span<cd> out) {
  const std::size_t np = paths.size();
  const std::size_t block = std::min(n, kAnchorEvery);
  std::vector<double> pr(np * block), pi(np * block);
  for (std::size_t p = 0; p < np; ++p) {
    const cd r = unit_phasor(step, paths[p].delay_s);
    double zr = 1.0, zi = 0.0;
    for (std::size_t k = 0; k < block; ++k) {
      pr[p * block + k] = zr;
      pi[p * block + k] = zi;
      const double nr = zr * r.real() - zi * r.imag();
      zi = zr * r.imag() + zi * r.real();
      zr = nr;
    }
  }
  std::vector<double> acc_r(block), acc_i(block);
  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t len = std::min(block, n - start);
    std::fill(acc_r.begin(), acc_r.end(), 0.0);
    std::fill(acc_i.begin(), acc_i.end(), 0.0);
    const double f = f0 + static_cast<double>(start) * step;
    for (std::size_t p = 0; p < np; ++p) {
      const cd z = paths[p].amplitude * unit_phasor(f, paths[p].delay_s);
      const double zr = z.real(), zi = z.imag();
      const double *wr = &pr[p * block];
      const double *wi = &pi[p * block];
      for (std::size_t k = 0; k < len; ++k) {
        acc_r[k] += zr * wr[k] - zi * wi[k];
        acc_i[k] += zr * wi[k] + zi * wr[k];
      }
    }
    for (std::size_t k = 0; k < len; ++k) {
      out[start + k] = {out[start + k].real() + acc_r[k], out[start + k].imag() + acc_i[k]};
    }
  }
}

void add_noise(std::span<cd> row, double sigma, std::uint64_t seed, std::uint64_t stream) {
  if (sigma <= 0.0) {
    return;
  }
  std::mt19937_64 gen(mix_seed(seed, stream));
  std::normal_distribution<double> dist(0.0, sigma / std::sqrt(2.0));
  for (auto &v : row) {
    const double re = dist(gen);
    const double im = dist(gen);
    v += cd{re, im};
  }
}

} // namespace

std::vector<cd> channel_response(std::span<const PointScatterer> scatterers,
                                 const BistaticGeometry &geom, std::span<const double> freqs,
                                 Pol pol) {
  geom.validate();
  std::vector<cd> out(freqs.size(), cd{0.0, 0.0});
  std::vector<Path> paths;
  paths.reserve(scatterers.size());
  for (const auto &s : scatterers) {
    paths.push_back(path_of(s, geom, pol));
  }
  double step = 0.0;
  if (is_uniform(freqs, step)) {
    add_paths_uniform(freqs.front(), step, freqs.size(), paths, out);
  } else {
    add_paths_direct(freqs, paths, out);
  }
  return out;
}

std::vector<cd> channel_response(const Scene &scene, const BistaticGeometry &geom,
                                 std::span<const double> freqs, double t, Pol pol) {
  auto scatterers = target_scatterers(scene, t);
  scatterers.insert(scatterers.end(), scene.background_scatterers.begin(),
                    scene.background_scatterers.end());
  return channel_response(scatterers, geom, freqs, pol);
}

SlowTimeCube simulate_slow_time(const Scene &scene, const BistaticGeometry &geom,
                                const OfdmConfig &config, std::size_t n_symbols,
                                const NoiseSpec &noise, std::size_t symbol_stride, Pol pol) {
  if (n_symbols < 1) {
    throw std::invalid_argument("simulate_slow_time: n_symbols must be >= 1");
  }
  if (symbol_stride < 1) {
    throw std::invalid_argument("simulate_slow_time: symbol_stride must be >= 1");
  }
  scene.validate();
  geom.validate();
  const auto ref = build_reference(config);
  const auto active = ref.active_carriers();
  std::vector<double> freqs(active.size());
  for (std::size_t j = 0; j < active.size(); ++j) {
    freqs[j] = config.carrier_frequency(active[j]);
  }

  SlowTimeCube cube;
  cube.config = config;
  cube.geometry = geom;
  cube.n_carriers = config.n_carriers;
  cube.n_symbols = n_symbols;
  cube.symbol_stride = symbol_stride;
  cube.symbol_rate_hz = config.symbol_rate_hz();
  cube.y.assign(n_symbols * config.n_carriers, cd{0.0, 0.0});

  parallel_for(n_symbols, [&](std::size_t m) {
    const auto h = channel_response(scene, geom, freqs, cube.symbol_time(m), pol);
    auto row = cube.symbol(m);
    for (std::size_t j = 0; j < active.size(); ++j) {
      row[active[j]] = h[j] * ref.x[active[j]];
    }
    add_noise(row, noise.sigma, noise.seed, m);
  });
  return cube;
}

double stop_and_go_ratio(const Scene &scene, const OfdmConfig &config) {
  double max_speed = 0.0;
  for (const auto &s : scene.static_scatterers) {
    max_speed = std::max(max_speed, norm(s.velocity));
  }
  for (const auto &p : scene.propellers) {
    max_speed = std::max(max_speed, p.omega() * p.radius_m);
  }
  return max_speed * config.symbol_duration_s / (config.wavelength() / 10.0);
}

BistaticGeometry flyover_geometry(double beta_deg, double range_m) {
  if (!(beta_deg >= 0.0 && beta_deg <= 180.0)) {
    throw std::invalid_argument("bistatic angle must lie in [0, 180] degrees");
  }
  if (!(range_m > 0.0)) {
    throw std::invalid_argument("range must be > 0");
  }
  const double half = deg_to_rad(beta_deg) / 2.0;
  const double s = std::sin(half), c = std::cos(half);
  BistaticGeometry g;
  g.target = {0.0, 0.0, 0.0};
  g.tx = {-range_m * s, 0.0, -range_m * c};
  g.rx = {range_m * s, 0.0, -range_m * c};
  if (beta_deg == 180.0) {
    // Exact collinearity rather than cos(pi/2) ~ 6e-17.
    g.tx = {-range_m, 0.0, 0.0};
    g.rx = {range_m, 0.0, 0.0};
  }
  return g;
}

std::vector<BistaticGeometry> flyover_sweep(std::span<const double> betas_deg, double range_m) {
  std::vector<BistaticGeometry> out;
  out.reserve(betas_deg.size());
  for (double beta : betas_deg) {
    if (!(beta > 0.0 && beta <= 180.0)) {
      throw std::invalid_argument("flyover bistatic angles must lie in (0, 180] degrees");
    }
    out.push_back(flyover_geometry(beta, range_m));
  }
  return out;
}

std::vector<double> linear_grid(double start, double stop, std::size_t n) {
  if (n < 1) {
    throw std::invalid_argument("grid needs at least one point");
  }
  std::vector<double> out(n, start);
  if (n == 1) {
    return out;
  }
  const double step = (stop - start) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = start + static_cast<double>(k) * step;
  }
  return out;
}

std::vector<double> stepped_grid(double start, double step, double stop) {
  if (!(step > 0.0) || stop < start) {
    throw std::invalid_argument("stepped grid needs step > 0 and stop >= start");
  }
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

std::vector<cd> default_system_response(std::span<const double> freqs) {
  std::vector<cd> out(freqs.size());
  if (freqs.empty()) {
    return out;
  }
  const double lo = freqs.front(), hi = freqs.back();
  const double mid = 0.5 * (lo + hi), half = hi > lo ? 0.5 * (hi - lo) : 1.0;
  constexpr double kAttenuation = 0.05; // about -26 dB
  constexpr double kDelay = 1.5e-9;     // cables and antenna feeds
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const double x = (freqs[k] - mid) / half;
    const double mag = kAttenuation * (1.0 + 0.25 * x - 0.15 * x * x + 0.05 * x * x * x);
    out[k] = mag * unit_phasor(freqs[k], kDelay) * std::polar(1.0, 0.3 * x);
  }
  return out;
}

VnaSweepPair simulate_vna_sweep(const Scene &scene, std::span<const double> betas_deg,
                                std::span<const double> freqs,
                                std::span<const cd> system_response, const NoiseSpec &noise,
                                const VnaSweepOptions &options) {
  if (betas_deg.empty() || freqs.empty()) {
    throw std::invalid_argument("simulate_vna_sweep: grids must be non-empty");
  }
  if (system_response.size() != freqs.size()) {
    throw std::invalid_argument("simulate_vna_sweep: system response length must match frequency grid");
  }
  scene.validate();
  const auto geometries = flyover_sweep(betas_deg, options.range_m);
  const auto target = target_scatterers(scene, 0.0);
  auto drifted = scene.background_scatterers;
  for (auto &s : drifted) {
    for (auto &v : s.coeff.m) v *= 1.0 + options.bg_drift;
  }

  VnaSweepPair pair;
  for (auto *rec : {&pair.dut_bg, &pair.bg}) {
    rec->freqs_hz.assign(freqs.begin(), freqs.end());
    rec->angles_deg.assign(betas_deg.begin(), betas_deg.end());
    rec->s21.assign(betas_deg.size() * kAllPols.size() * freqs.size(), cd{0.0, 0.0});
  }
  pair.dut_bg.label = SweepLabel::DutBg;
  pair.bg.label = SweepLabel::Bg;

  const std::size_t n_pol = kAllPols.size();
  parallel_for(betas_deg.size() * n_pol, [&](std::size_t item) {
    const std::size_t a = item / n_pol;
    const Pol pol = kAllPols[item % n_pol];
    const auto h_target = channel_response(target, geometries[a], freqs, pol);
    const auto h_bg_dut = channel_response(scene.background_scatterers, geometries[a], freqs, pol);
    const auto h_bg = channel_response(drifted, geometries[a], freqs, pol);
    auto dut_trace = pair.dut_bg.trace(a, pol);
    auto bg_trace = pair.bg.trace(a, pol);
    for (std::size_t k = 0; k < freqs.size(); ++k) {
      dut_trace[k] = (h_target[k] + h_bg_dut[k]) * system_response[k];
      bg_trace[k] = h_bg[k] * system_response[k];
    }
    add_noise(dut_trace, noise.sigma, noise.seed, 2 * item);
    add_noise(bg_trace, noise.sigma, noise.seed, 2 * item + 1);
  });
  return pair;
}

} // namespace icas
