#pragma once

#include <cstdint>

namespace floorlab {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so streams are reproducible in any language and
/// parallel consumers never share state.
///
/// draw = splitmix64_finalize(seed ^ (stream * 0xD1B54A32D192ED03)
///                            + (counter + 1) * 0x9E3779B97F4A7C15)
/// where splitmix64_finalize(z):
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const {
        std::uint64_t z = (seed_ ^ (stream_ * 0xD1B54A32D192ED03ULL)) +
                          (counter + 1) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer on [0, bound), bound > 0. Uses the multiply-shift map;
    /// the bias is below 2^-32 for any bound used here.
    std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(bits(counter)) * bound) >> 64);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

// Stream ids in use. Kept in one place so no two consumers collide.
namespace streams {
inline constexpr std::uint64_t kGenerator = 1;
inline constexpr std::uint64_t kLogger = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kSubsample = 4;
}  // namespace streams

}  // namespace floorlab
