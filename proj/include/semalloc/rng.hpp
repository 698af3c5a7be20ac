#pragma once

#include <cstdint>

namespace semalloc {

// Counter-based random stream. Every draw is a pure function of
// (seed, stream, index, draw), so sampling order never matters and adding a
// consumer never perturbs the values seen by another.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index, std::uint64_t draw) const {
    std::uint64_t h = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ stream);
    h = mix(h ^ index);
    return mix(h ^ draw);
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform(std::uint64_t stream, std::uint64_t index, std::uint64_t draw) const {
    return static_cast<double>(bits(stream, index, draw) >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi, std::uint64_t stream, std::uint64_t index,
                 std::uint64_t draw) const {
    return lo + (hi - lo) * uniform(stream, index, draw);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace semalloc
