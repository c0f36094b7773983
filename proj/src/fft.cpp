#include "icas/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace icas::fft {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
public:
  ~PlanCache() {
    for (auto &[key, plan] : plans_) {
      fftw_destroy_plan(plan);
    }
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_pair(n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    std::vector<cd> a(n), b(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex *>(a.data()),
                                      reinterpret_cast<fftw_complex *>(b.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) {
      throw std::runtime_error("FFTW failed to create a plan");
    }
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache &cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<const cd> in, std::span<cd> out, int sign) {
  if (in.size() != out.size()) {
    throw std::invalid_argument("fft: input and output lengths differ");
  }
  if (in.empty()) {
    return;
  }
  fftw_plan plan = cache().get(in.size(), sign);
  if (in.data() == out.data()) {
    std::vector<cd> tmp(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(tmp.data()),
                     reinterpret_cast<fftw_complex *>(out.data()));
  } else {
    // FFTW does not modify the input of an out-of-place complex DFT.
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(const_cast<cd *>(in.data())),
                     reinterpret_cast<fftw_complex *>(out.data()));
  }
}

} // namespace

void forward(std::span<const cd> in, std::span<cd> out) { execute(in, out, FFTW_FORWARD); }

void inverse(std::span<const cd> in, std::span<cd> out) {
  execute(in, out, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto &v : out) {
    v *= scale;
  }
}

} // namespace icas::fft
