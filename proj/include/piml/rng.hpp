#pragma once

#include <cmath>
#include <cstdint>

namespace piml {

// splitmix64 finalizer; also the core of the portable generator below.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and up to three stream ids.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ull);
    h = mix64(h ^ mix64(a));
    h = mix64(h ^ mix64(b + 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ mix64(c + 0x3c6ef372fe94f82bull));
    return h;
}

// Deterministic generator with hand-rolled distributions. The standard
// <random> distributions are implementation-defined, which would break the
// byte-identical reproducibility contract; everything here is pinned.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Multiply-shift; bias is negligible for the n used here (<= 1e6).
        return static_cast<std::uint64_t>(u01() * static_cast<double>(n));
    }

    /// Standard normal via Box-Muller (pair cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - u01();  // (0, 1]
        double u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(T& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace piml
