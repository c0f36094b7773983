#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace icas {

/// Worker count from ICAS_THREADS (default 1, clamped to [1, 256]).
std::size_t thread_count();

/// Calls fn(i) for i in [0, n). Work is split into contiguous chunks; results
/// must not depend on execution order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &fn);

/// Stateless 64-bit mixer used to derive per-item RNG seeds from a run seed.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace icas
