#pragma once

#include <cstdint>
#include <random>

namespace dilute {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent substream seed from a parent seed and an index.
/// Used for trial seeds (master, trial) and for the mask/value split of a sample.
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

Rng make_rng(std::uint64_t seed);

/// Well-known substream indices.
namespace stream {
inline constexpr std::uint64_t mask = 1;
inline constexpr std::uint64_t value = 2;
inline constexpr std::uint64_t probe = 3;
inline constexpr std::uint64_t start_vector = 4;
}  // namespace stream

}  // namespace dilute
