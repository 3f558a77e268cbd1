#pragma once

/// @file rng.hpp
/// @brief Per-path random streams.
///
/// The stream of path j is a pure function of (seed, j): a 64-bit Mersenne
/// Twister seeded with a SplitMix64 hash of both. Two kinds of draws are
/// served from it:
///   - sign():    one bit, taken LSB-first from a cached 64-bit word;
///   - uniform(): a fresh 64-bit word mapped to [0, 1) with 53-bit precision.
/// The cached word is only refilled by sign(), so the two kinds interleave
/// deterministically as long as the call order is fixed.

#include <cstdint>
#include <random>

namespace skewsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path_index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(path_index + 0x632BE59BD9B4E019ULL));
}

class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path_index) : engine_(path_seed(seed, path_index)) {}

    /// +1 or -1 with probability 1/2 each.
    int sign() {
        if (left_ == 0) {
            bits_ = engine_();
            left_ = 64;
        }
        const int bit = static_cast<int>(bits_ & 1U);
        bits_ >>= 1;
        --left_;
        return 2 * bit - 1;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
    std::uint64_t bits_ = 0;
    int left_ = 0;
};

}  // namespace skewsim
