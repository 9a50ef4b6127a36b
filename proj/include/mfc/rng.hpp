#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace mfc {

using Rng = std::mt19937_64;

/// Named purposes for independent random streams derived from one run seed.
enum class StreamPurpose : std::uint64_t {
    Placement = 1,
    Links = 2,
    AgentInit = 3,
    Agent = 4,
    CentralPush = 5,
};

/// Deterministic stream for (seed, purpose, index); distinct triples give unrelated streams.
inline Rng make_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

/// Inverse-CDF draw from a discrete distribution whose entries sum to one.
template <typename Probs>
int sample_categorical(Rng& rng, const Probs& probs) {
    const double u = uniform01(rng);
    double acc = 0.0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
        acc += probs[i];
        if (u < acc) {
            return i;
        }
    }
    // Rounding left u above the final partial sum; take the last entry with mass.
    for (int i = n - 1; i >= 0; --i) {
        if (probs[i] > 0.0) {
            return i;
        }
    }
    return n - 1;
}

/// Uniform integer in [0, n) by rejection; identical across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % n;
}

} // namespace mfc
