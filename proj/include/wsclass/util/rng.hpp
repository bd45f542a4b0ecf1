#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

// Deterministic hashing and pseudo-randomness. Everything routed through this
// header is bit-exact across platforms and standard libraries; std::hash,
// std::shuffle and the <random> distributions are implementation-defined and
// must not be used anywhere results are persisted or frozen into tests.

namespace wsclass::rng {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : s) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Order-sensitive combination of mixed words; used for seed fan-out.
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x9e3779b97f4a7c15ull));
}

inline std::uint64_t mix_all(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545f4914f6cdd1dull;
    for (std::uint64_t p : parts) h = mix(h, p);
    return h;
}

// Uniform double in [0, 1) from the top 53 bits of a mixed word.
inline double unit_double(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Counter-based helpers: a value keyed by (seed, labels...) is independent of
// call order, which keeps per-document draws stable under any batching.
inline double keyed_unit(std::uint64_t seed, std::string_view label, std::uint64_t counter = 0) {
    return unit_double(splitmix64(mix(mix(seed, fnv1a(label)), counter)));
}

inline double keyed_uniform(std::uint64_t seed, std::string_view label, double lo, double hi,
                            std::uint64_t counter = 0) {
    return lo + (hi - lo) * keyed_unit(seed, label, counter);
}

// Sequential generator for shuffles and subset draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x6a09e667f3bcc909ull)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix64(state_);
    }

    double next_unit() { return unit_double(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Unbiased uniform index in [0, n) by rejection.
    std::size_t index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<std::size_t>(x % bound);
    }

    double gaussian() {
        // Box-Muller; draws two units per call, discards the second branch.
        double u1 = next_unit();
        double u2 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, pinned here rather than std::shuffle so streams are
        // identical across standard libraries.
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = index(i + 1);
            if (i != j) std::swap(v[i], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace wsclass::rng
