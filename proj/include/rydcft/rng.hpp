#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rydcft {

// Counter-based generator: output depends only on (key, counter), so draws are
// reproducible regardless of how work is split across threads.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t stream = 0)
      : key_(mix(key ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

  std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + 0xd1b54a32d192ed03ULL * counter); }
  // Uniform in (0,1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter), u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t key_;
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

}  // namespace rydcft
