#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace logogan {

// splitmix64; self-contained so streams are reproducible across
// standard libraries (std:: distributions are not pinned by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        return next_u64() % n;
    }

    // standard normal via Box-Muller
    float normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = static_cast<float>(r * std::sin(t));
        have_spare_ = true;
        return static_cast<float>(r * std::cos(t));
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    float spare_ = 0.0f;
};

// Combine a base seed with stream identifiers so every consumer of
// randomness gets an independent, resumable stream.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = 0x9E3779B97F4A7C15ull ^ a;
    auto fold = [&h](std::uint64_t v) {
        h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        h *= 0xFF51AFD7ED558CCDull;
        h ^= h >> 33;
    };
    fold(b);
    fold(c);
    return h;
}

} // namespace logogan
