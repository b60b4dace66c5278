#pragma once

#include <cstdint>
#include <random>

namespace gi {

/// Independent stream for (seed, stream tag, index). Used so that pattern j,
/// or noise draw j, never depends on how many values were drawn before it.
inline std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Stream tags.
inline constexpr std::uint64_t kStreamPattern = 0x7061747465726e;  // "pattern"
inline constexpr std::uint64_t kStreamEmitter = 0x656d6974;        // "emit"
inline constexpr std::uint64_t kStreamNoise = 0x6e6f697365;        // "noise"
inline constexpr std::uint64_t kStreamInit = 0x696e6974;           // "init"
inline constexpr std::uint64_t kStreamShuffle = 0x73687566;        // "shuf"
inline constexpr std::uint64_t kStreamAugment = 0x61756728;        // "aug("
inline constexpr std::uint64_t kStreamScene = 0x7363656e65;        // "scene"

}  // namespace gi
