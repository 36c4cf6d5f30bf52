#pragma once

#include <cstdint>
#include <random>

namespace tcgreen {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of stream `index` under master seed `master`. Streams depend only on the pair,
/// so the assignment of trajectories to workers cannot change the samples.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master, std::uint64_t index) { return Rng(stream_seed(master, index)); }

/// Uniform on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
    for (;;) {
        const double u = std::generate_canonical<double, 64>(rng);
        if (u > 0.0 && u < 1.0) return u;
    }
}

}  // namespace tcgreen
