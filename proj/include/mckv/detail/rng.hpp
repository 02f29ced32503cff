#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mckv::detail {

// splitmix64: deterministic across platforms, cheap to seed per (stream, step).
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0,1): 53-bit mantissa, never exactly 0 or 1.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double exponential() { return -std::log(uniform()); }

    /// Box-Muller; draws two uniforms per pair, caches the spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    SplitMix64 s(a ^ 0x2545f4914f6cdd1dULL);
    std::uint64_t h = s.next_u64() ^ b;
    SplitMix64 s2(h);
    h = s2.next_u64() ^ c;
    SplitMix64 s3(h);
    return s3.next_u64();
}

}  // namespace mckv::detail
