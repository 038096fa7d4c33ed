#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace capmeas {

/// SplitMix64. Used for every seeded draw in the library so generated
/// signals and simulations are reproducible across platforms and standard
/// library implementations (std distributions are not).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in the open interval (0, 1).
    double uniform_open() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    bool coin() noexcept { return (next() >> 63) != 0; }

    /// Standard normal via Box-Muller (one value per call; the pair partner is
    /// discarded to keep the stream position independent of call history).
    double normal() noexcept {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t state_;
};

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    SplitMix64 mix(base ^ (0xD1B54A32D192ED03ull * (stream + 1)));
    return mix.next();
}

}  // namespace capmeas
