#pragma once

#include <cstdint>
#include <random>

namespace bode {

// SplitMix64 mixing step, used to derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Collapse up to four coordinates (purpose tag, repetition, step, iteration)
// into one 64-bit stream id.
inline std::uint64_t stream_key(std::uint64_t a, std::uint64_t b = 0,
                                std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t h = splitmix64(a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return splitmix64(h ^ d);
}

// Purpose tags keeping unrelated consumers on disjoint streams.
namespace stream {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t step = 2;
inline constexpr std::uint64_t muller = 3;
inline constexpr std::uint64_t amzal_weight = 4;
inline constexpr std::uint64_t amzal_resample = 5;
inline constexpr std::uint64_t amzal_move = 6;
inline constexpr std::uint64_t repetition = 7;
}  // namespace stream

// A (seed, stream) pair names one reproducible draw sequence. Identical
// pairs give identical sequences on every run and worker count; engines are
// created per (step, iteration) key, never per thread.
struct RandomSource {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::mt19937_64 engine() const {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        return std::mt19937_64(seq);
    }
};

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    return RandomSource{seed, stream}.engine();
}

}  // namespace bode
