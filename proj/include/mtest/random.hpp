#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mtest {

/// SplitMix64 finalizer. Used for seeding and for deriving substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derive a substream seed from a base seed and a tuple of identifiers
/// (hypothesis id, replicate index, grid cell, ...).
constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> ids) noexcept {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t id : ids) {
        h = splitmix64(h ^ splitmix64(id + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

/// Stream tags separating data draws from estimator draws.
enum class StreamTag : std::uint64_t {
    Estimator = 0x45535431,
    NullData = 0x4E554C4C,
    PowerData = 0x504F5752,
    PowerEstimator = 0x50455354,
};

constexpr std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

/// xoshiro256** generator with Box-Muller normal variates.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed) noexcept {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += 0x9E3779B97F4A7C15ULL;
            word = splitmix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (lo, hi); boundary draws are redrawn.
    double uniform_open(double lo, double hi) noexcept {
        for (;;) {
            const double x = lo + (hi - lo) * uniform();
            if (x > lo && x < hi) return x;
        }
    }

    double normal() noexcept;

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace mtest
