#pragma once

// Seeding and uniform-variate conventions shared by sampling and the
// simulation harness. Drawing through these helpers (rather than the
// distribution classes of <random>, whose algorithms are not pinned by the
// standard) keeps streams identical across standard libraries, and per-use
// derived seeds make results independent of how work is split over threads.

#include <cstdint>
#include <random>

namespace nnfe {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// A well-separated seed for stream `stream` under a user-facing base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    return splitmix64(s);
}

// Uniform on [0,1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0,1); quantile transforms need the open interval.
inline double uniform_open01(std::mt19937_64& rng) {
    for (;;) {
        const double u = uniform01(rng);
        if (u > 0.0) return u;
    }
}

}  // namespace nnfe
