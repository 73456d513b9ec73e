#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mcurve {

/// Independent generator for one stratum: the stream depends only on the run
/// seed and the stratum labels, never on scheduling.
inline std::mt19937_64 stratum_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> labels)
{
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(seed));
    words.push_back(static_cast<std::uint32_t>(seed >> 32));
    for (std::uint64_t l : labels) {
        words.push_back(static_cast<std::uint32_t>(l));
        words.push_back(static_cast<std::uint32_t>(l >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

/// Uniform double in [0, 1) from the top 53 bits. Used instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace mcurve
