#pragma once

#include <complex>
#include <span>
#include <vector>

namespace icas::fft {

using cd = std::complex<double>;

/// X[k] = sum_n x[n] exp(-j 2 pi k n / N). Any length; `out` may alias `in`.
void forward(std::span<const cd> in, std::span<cd> out);

/// x[n] = (1/N) sum_k X[k] exp(+j 2 pi k n / N).
void inverse(std::span<const cd> in, std::span<cd> out);

inline std::vector<cd> forward(std::span<const cd> in) {
  std::vector<cd> out(in.size());
  forward(in, out);
  return out;
}

inline std::vector<cd> inverse(std::span<const cd> in) {
  std::vector<cd> out(in.size());
  inverse(in, out);
  return out;
}

} // namespace icas::fft
