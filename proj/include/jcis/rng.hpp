#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jcis {

namespace detail {

/// SplitMix64 finalizer (Stafford's mix13 variant).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

} // namespace detail

/// Derives a child stream seed from a root seed and up to three tag words.
/// The derivation is a fixed chain of SplitMix64 finalizers:
///
///   h = mix64(root + GOLDEN)
///   h = mix64(h ^ (tag_i + i * GOLDEN))   for each tag in order
///
/// Distinct (root, tag...) tuples map to statistically independent streams,
/// so replicates and columns can be generated in any order, or in parallel,
/// without changing their content.
constexpr std::uint64_t derive_seed(std::uint64_t root,
                                    std::uint64_t tag0,
                                    std::uint64_t tag1 = 0,
                                    std::uint64_t tag2 = 0) noexcept {
    std::uint64_t h = detail::mix64(root + detail::kGolden);
    h = detail::mix64(h ^ (tag0 + 1 * detail::kGolden));
    h = detail::mix64(h ^ (tag1 + 2 * detail::kGolden));
    h = detail::mix64(h ^ (tag2 + 3 * detail::kGolden));
    return h;
}

/// Small counter-based 64-bit generator: output i is mix64(seed + i * GOLDEN)
/// (the SplitMix64 sequence). Every stream is fully determined by its seed,
/// and seeds for child streams come from derive_seed.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += detail::kGolden;
        return detail::mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_double();
    }

    /// Uniform integer in [0, bound) via rejection-free multiply-shift
    /// (Lemire); bound must be > 0. Bias is negligible for bound << 2^64.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// 1.0 with probability prob, else 0.0.
    double bernoulli(double prob) noexcept { return next_double() < prob ? 1.0 : 0.0; }

    /// Standard normal via Box-Muller; pairs are cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace jcis
