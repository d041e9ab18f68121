#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace varbn {

// splitmix64 mixer, used to derive independent seed streams from a master
// seed by a counter scheme: stream k gets derive_seed(master, k). Adding
// streams never perturbs existing ones.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master + stream);
}

// Uniform double in [0, 1). Built directly from the engine output so the
// value sequence does not depend on the standard library's distribution
// implementation.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n must be > 0.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

// Inverse-CDF draw from a negative exponential with the given mean.
inline double exponential_draw(std::mt19937_64& rng, double mean) {
    // 1 - u is in (0, 1], so the log argument never hits zero.
    return -mean * std::log(1.0 - uniform01(rng));
}

}  // namespace varbn
