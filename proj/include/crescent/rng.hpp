#pragma once

// Seed derivation shared by every stochastic part of the simulator.
//
// All substreams derive from 64-bit SplitMix finalisation so that any
// implementation can reproduce them:
//
//   splitmix64(x): z = x + 0x9E3779B97F4A7C15
//                  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                  z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                  return z ^ (z >> 31)
//   stable_mix(a, b) = splitmix64(a ^ splitmix64(b))
//   key hash         = FNV-1a 64 over the UTF-8 bytes of the key
//   uniform(x)       = ((splitmix64(x) >> 11) + 0.5) * 2^-53   in (0, 1)

#include <cstdint>
#include <string_view>

namespace crescent::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stable_mix(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b));
}

constexpr std::uint64_t fnv1a64(std::string_view key) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : key) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Uniform draw strictly inside (0, 1).
constexpr double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(splitmix64(bits) >> 11) + 0.5) * 0x1.0p-53;
}

/// Seed of realization `index` in an ensemble started from `master_seed`.
constexpr std::uint64_t realization_seed(std::uint64_t master_seed,
                                         std::uint64_t index) noexcept
{
    return stable_mix(master_seed, index);
}

/// Uniform draw of the substream identified by (seed, key).
constexpr double keyed_uniform(std::uint64_t seed, std::string_view key) noexcept
{
    return to_open_unit(stable_mix(seed, fnv1a64(key)));
}

} // namespace crescent::rng
