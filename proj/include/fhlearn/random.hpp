#pragma once

// Seeded random streams.
//
// Every stochastic routine takes an explicit `Rng&`. Independent substreams are
// derived from one root seed by hashing a path of integer tags with SplitMix64,
// e.g. stream_seed(root, {pass, level, quadrature, shot}). The derivation only
// depends on the tags, so serial and parallel schedules draw identical numbers.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fhlearn {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = splitmix64(root);
    for (std::uint64_t tag : tags) h = splitmix64(h ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
    return Rng(stream_seed(root, tags));
}

/// Uniform on [0, 1) from the top 53 bits; identical on every standard library.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; n >= 1.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do x = rng();
    while (x >= limit);
    return x % n;
}

}  // namespace fhlearn
