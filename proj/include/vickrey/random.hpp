#pragma once

#include <cstdint>
#include <random>

namespace vickrey {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent random streams inside one replication.
enum class Stream : std::uint64_t { strategy = 1, opponent = 2, value = 3 };

/// Seed for (master_seed, replication, stream):
///   splitmix64(splitmix64(master ^ splitmix64(rep)) + stream).
/// Depends only on its arguments, so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replication,
                                    Stream stream) noexcept {
  return splitmix64(splitmix64(master_seed ^ splitmix64(replication)) +
                    static_cast<std::uint64_t>(stream));
}

/// Uniform on [0, 1) with 53 random bits; bit-identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
inline double uniform_open_closed(Rng& rng) { return 1.0 - uniform01(rng); }

}  // namespace vickrey
