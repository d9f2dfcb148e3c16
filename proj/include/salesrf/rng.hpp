#pragma once

#include <cstdint>
#include <span>

namespace salesrf {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for child stream `stream` of `master`:
///     derive_seed(master, stream) = mix64(master ^ mix64(stream + 1))
/// Distinct streams of one master always yield distinct seeds, since every
/// step is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return mix64(master ^ mix64(stream + 1));
}

/// xoshiro256** seeded through SplitMix64. All draws are defined here, not by
/// <random> distributions, so sequences are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() noexcept;

    double normal() noexcept;

    /// Poisson draw by sequential inversion; large means are split into
    /// chunks of at most 16.
    std::int64_t poisson(double mean) noexcept;

    /// Fisher-Yates prefix shuffle: the first k entries become a uniform
    /// k-subset in random order.
    template <typename T>
    void partial_shuffle(std::span<T> values, std::size_t k) noexcept {
        for (std::size_t i = 0; i < k && i + 1 < values.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(below(values.size() - i));
            std::swap(values[i], values[j]);
        }
    }

private:
    std::uint64_t s_[4];
};

}  // namespace salesrf
