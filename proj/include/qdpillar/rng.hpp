#pragma once

#include <cstdint>
#include <limits>

namespace qdpillar {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// SplitMix64 as a UniformRandomBitGenerator. Seeding is a single word, so a
/// fresh stream per pulse or per trial costs nothing.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Stream tags keep the draws of different stages independent even when they
// share (seed, index).
enum class StreamTag : std::uint64_t {
  Emission = 0x01,
  Jitter = 0x02,
  Diffusion = 0x03,
  Routing = 0x04,
  Synthetic = 0x05,
};

/// Independent generator for item `index` of a seeded ensemble.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag) noexcept {
  std::uint64_t key = splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
  key = splitmix64(key ^ (static_cast<std::uint64_t>(tag) * 0xbb67ae8584caa73bULL));
  key = splitmix64(key ^ index);
  return Rng(key);
}

/// Uniform double in (0, 1], never zero so it is safe under log().
inline double uniform_open0(Rng& rng) noexcept {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace qdpillar
