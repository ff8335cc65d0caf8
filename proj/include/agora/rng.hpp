#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace agora {

// Deterministic seeding helpers. All stochastic components in the simulator
// derive their streams from a scenario seed through these mixers so that a
// run is a pure function of its config.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
    return splitmix64(s);
}

inline std::uint64_t hash_str(std::string_view s) {
    // FNV-1a, 64 bit
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform01(Rng& rng) {
    // 53-bit mantissa, avoids distribution-object state
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Marsaglia-Tsang gamma sampler; explicit so results do not depend on the
// standard library's std::gamma_distribution implementation.
inline double sample_gamma(Rng& rng, double shape) {
    if (shape < 1.0) {
        const double u = uniform01(rng);
        return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            // Box-Muller normal draw
            const double u1 = uniform01(rng);
            const double u2 = uniform01(rng);
            x = std::sqrt(-2.0 * std::log(u1 + 1e-300)) *
                std::cos(6.283185307179586 * u2);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double sample_beta(Rng& rng, double alpha, double beta) {
    const double x = sample_gamma(rng, alpha);
    const double y = sample_gamma(rng, beta);
    return x / (x + y);
}

}  // namespace agora
