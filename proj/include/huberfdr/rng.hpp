#pragma once

#include <cstdint>
#include <random>

#include "huberfdr/normal.hpp"

namespace huberfdr {

// Uniform(0,1) stream over mt19937_64 with an explicit output mapping.
// std::uniform_real_distribution is not bit-portable across standard
// library implementations; the shift-and-scale below is.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  // Strictly inside (0,1): top 53 bits offset by half an ulp.
  double next() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

  double next_normal() { return norm_quantile(next()); }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent substream seed for (base, index); used so that replicate
// results do not depend on execution order or parallelism.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix_seed(base ^ mix_seed(index + 1));
}

}  // namespace huberfdr
