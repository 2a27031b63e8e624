#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <utility>

namespace qdre {

/// SplitMix64 step. Used for seeding and for deriving sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Sub-seed for a named role: splitmix64(seed ^ fnv1a64(role)).
/// Every stochastic component of a run draws its seed through this.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view role);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// xoshiro256** 1.0 (Blackman & Vigna). State is expanded from a 64-bit
/// seed with SplitMix64. Satisfies UniformRandomBitGenerator.
///
/// The distributions below are implemented here rather than taken from
/// <random>, whose distribution algorithms are implementation-defined; that
/// keeps generated datasets bit-identical across standard libraries.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal via the Box-Muller transform (pairs are cached).
    double normal();
    /// Uniform integer in [0, n), rejection-sampled (no modulo bias).
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace qdre
