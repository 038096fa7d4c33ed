#pragma once

// Synthetic system under test: memoryless polynomial followed by an FIR
// filter (Hammerstein), slow sinusoidal gain drift, and additive noise.

#include "capmeas/signal_core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace capmeas {

struct NoiseSpec {
    enum class Kind { White, Pink };
    Kind kind = Kind::White;
    double level = 0.0;  ///< RMS
};

struct DriftSpec {
    double depth = 0.0;  ///< fractional gain amplitude, |depth| < 1
    double rate_hz = 0.0;
};

struct SimTarget {
    std::vector<double> ir{1.0};
    double eps2 = 0.0;
    double eps3 = 0.0;
    NoiseSpec noise;
    DriftSpec drift;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seeded Gaussian noise under exp(-6.91 t / decay_time), peak-normalized so
/// the largest |tap| is 1. M = 1 gives [1].
std::vector<double> synth_impulse_response(std::uint64_t seed, double decay_time, int sample_rate, std::size_t length);

/// y = (1 + depth sin(2 pi rate t)) (ir * (x + eps2 x^2 + eps3 x^3)) + noise.
/// The output keeps the full convolution tail: len(x) + len(ir) - 1 samples.
Signal apply_target(const SimTarget& target, const Signal& input);

/// Seeded noise of the given kind, scaled to the requested RMS.
std::vector<double> make_noise(NoiseSpec spec, std::size_t length, std::uint64_t seed);

/// JSON form: {"ir": [...]} or {"ir_synth": {"seed", "decay_time", "length", "sample_rate"}},
/// plus "eps2", "eps3", "noise": {"kind", "level"}, "drift": {"depth", "rate_hz"}, "seed".
std::string to_json(const SimTarget& target);
SimTarget sim_target_from_json(std::string_view text);

}  // namespace capmeas
