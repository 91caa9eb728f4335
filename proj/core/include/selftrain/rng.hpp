#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace selftrain::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// FNV-1a over bytes, avalanched. Used to fold string keys into stream ids.
inline std::uint64_t hash_bytes(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return mix(h);
}

// Compile-time-free salt for subsystem stream separation ("gen", "prm", ...).
inline std::uint64_t key(std::string_view name) { return hash_bytes(name); }

/**
 * Deterministic splitmix64 stream. Every derived quantity (uniform, bernoulli,
 * gaussian) is produced from explicit integer arithmetic so byte-identical
 * replay holds across runs of the same build; no std::*_distribution is used
 * because libstdc++ does not pin their draw sequences.
 */
class Stream {
public:
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    // Integer in [0, n), n > 0. Multiply-shift bound; bias is O(n / 2^64).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Box-Muller. Consumes two uniforms per call, no cached spare.
    double next_gaussian(double mu, double sigma) {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(6.283185307179586 * u2);
    }

    // True truncated normal via rejection; the cap only triggers for
    // parameters whose acceptance region is vanishingly small.
    double next_truncated_gaussian(double mu, double sigma, double lo, double hi) {
        if (sigma <= 0.0) return std::clamp(mu, lo, hi);
        for (int attempt = 0; attempt < 4096; ++attempt) {
            const double x = next_gaussian(mu, sigma);
            if (x >= lo && x <= hi) return x;
        }
        return std::clamp(mu, lo, hi);
    }

private:
    std::uint64_t state_;
};

// Independent stream for a composite key, e.g.
//   derive(seed, {key("gen"), hash_bytes(problem_id), sample_index}).
inline Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix(seed + kGolden);
    for (std::uint64_t k : keys) s = mix(s ^ mix(k + kGolden));
    return Stream(s);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = mix(seed + kGolden);
    for (std::uint64_t k : keys) s = mix(s ^ mix(k + kGolden));
    return s;
}

}  // namespace selftrain::rng
