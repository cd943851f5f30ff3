#include "dilute/rng.hpp"

#include <array>

namespace dilute {

Rng make_rng(std::uint64_t seed) {
    // Fill the full mt19937_64 state from a SplitMix64 sequence so nearby seeds
    // do not produce correlated early output.
    std::array<std::uint32_t, 16> words{};
    std::uint64_t s = seed;
    for (std::size_t i = 0; i < words.size(); i += 2) {
        s = splitmix64(s);
        words[i] = static_cast<std::uint32_t>(s);
        words[i + 1] = static_cast<std::uint32_t>(s >> 32);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace dilute
