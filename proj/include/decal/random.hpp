#pragma once

#include <cstdint>
#include <random>

namespace decal {

using Rng = std::mt19937_64;

/// Mixes a master seed with a stream tag and an index into an independent seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) noexcept
{
    std::uint64_t x = master ^ (stream * 0x9E3779B97F4A7C15ULL) ^ (index * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL);
    // splitmix64 finalizer
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

} // namespace decal
