#pragma once

#include <cstdint>
#include <limits>

namespace cbprior {

// SplitMix64 finalizer. Used to derive independent stream seeds from a run
// seed and a stream id (position, trial, ...).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Small counter-based generator satisfying UniformRandomBitGenerator. Cheap to
// construct, so one can be created per sequence position.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Unbiased integer in [0, n) by rejection; n must be > 0. Independent of the
// standard library's distribution implementation, so results are stable
// across toolchains.
template <class Gen>
std::uint64_t uniform_below(Gen& gen, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = gen();
  while (x >= limit) x = gen();
  return x % n;
}

// Double in [0, 1) from the top 53 bits.
template <class Gen>
double uniform_unit(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace cbprior
