#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace wsvad {

// Seeded generator with hand-rolled distributions. The standard library's
// distribution objects are implementation-defined, so uniform/gaussian draws
// are derived directly from the mt19937_64 stream to keep seeded runs
// reproducible across toolchains.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, bound) by rejection.
  uint64_t below(uint64_t bound);

  // Box-Muller; the spare draw is cached so consecutive calls consume the
  // stream in a fixed pattern.
  double gaussian();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Splitmix64 finalizer; used to derive independent per-item seeds.
uint64_t mix_seed(uint64_t seed, uint64_t salt);

}  // namespace wsvad
