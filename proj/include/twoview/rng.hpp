#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace twoview {

/// SplitMix64 generator (Steele, Lea & Flood). The output sequence is fully
/// specified by the seed, so shuffles and splits driven by it reproduce
/// bit-for-bit on any platform and in any language that implements the same
/// three-line mixing function.
///
/// Satisfies UniformRandomBitGenerator so it can feed <random> distributions,
/// but note that std distributions themselves are implementation-defined.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Unbiased integer in [0, bound) by rejection on the top of the range.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t limit = max() - (max() % bound);
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool coin() noexcept { return ((*this)() >> 63) != 0; }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle, iterating from the back: for i = n-1 .. 1 swap
/// element i with element below(i + 1).
template <typename T>
void fisher_yates(std::span<T> items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace twoview
