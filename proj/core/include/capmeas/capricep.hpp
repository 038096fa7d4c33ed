#pragma once

// Test-signal synthesis.
//
// A unit-CAPRICEP is an all-pass pulse whose spectrum is exp(j phi[k]), where
// phi accumulates many 2*pi phase transitions at random center bins with
// random polarity. Three units mixed with Walsh-Hadamard sign patterns at N/4
// shifts give a periodic test signal with a flat magnitude spectrum in which
// each bin belongs to exactly one unit (k = 0 mod 4: unit 1, k = 2 mod 4:
// unit 2, odd k: unit 3).

#include "capmeas/signal_core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capmeas {

enum class TransitionShape { Erf, Sigmoid, Iir };

std::string_view to_string(TransitionShape shape) noexcept;
TransitionShape parse_transition_shape(std::string_view name);

/// Walsh-Hadamard matrix of order 4 (rows select sign patterns per unit).
inline constexpr std::array<std::array<int, 4>, 4> kHadamard4{{
    {1, 1, 1, 1},
    {1, -1, 1, -1},
    {1, 1, -1, -1},
    {1, -1, -1, 1},
}};

/// Mixing gains C_q for the three units.
inline const std::array<double, 3> kUnitGain{1.0, 1.0, std::sqrt(2.0)};

/// Odd, monotone phase profile saturating at +-pi/2.
///  erf:     (pi/2) erf(u)
///  sigmoid: (pi/2) tanh(a u), the logistic curve fitted to erf (a = 1.2036)
///  iir:     atan(sqrt(pi) u), the first-order all-pass phase curve with the
///           same slope at the origin as the erf profile
double phase_transition(TransitionShape shape, double u) noexcept;

/// Transition count and width chosen for a given effective width.
struct CapricepDesign {
    std::size_t transition_count = 0;
    double transition_width = 0.0;  ///< in bins (scale of u)
    double overlap = 0.0;           ///< expected transitions per transition width
    double envelope_correlation = 0.0;
};

/// Deterministic (seed-independent) calibration from the ensemble power
/// envelope. Results are cached per (shape, L, width in samples).
CapricepDesign calibrate_capricep(TransitionShape shape, double effective_width, int sample_rate,
                                  std::size_t length);

struct UnitCapricep {
    std::vector<double> response;  ///< length L, pulse centered at L/2
    std::vector<double> phase;     ///< accumulated transition phase, bins 0..L/2 (no centering delay)
    double effective_width = 0.0;  ///< seconds
    std::size_t transition_count = 0;
    double transition_width = 0.0;
    double envelope_correlation = 0.0;  ///< realized envelope vs raised-cosine target
    TransitionShape shape = TransitionShape::Erf;
    std::uint64_t seed = 0;
    int sample_rate = 0;
};

/// Generates a unit-CAPRICEP. L must be a power of two with
/// effective_width * sample_rate < L / 2. The pulse is circularly centered at
/// L/2 and its power envelope follows a raised cosine whose full support is
/// effective_width.
UnitCapricep gen_unit_capricep(std::uint64_t seed, double effective_width, int sample_rate, std::size_t length,
                               TransitionShape shape = TransitionShape::Erf);

/// Raised-cosine power target of full support `support` samples centered at L/2.
std::vector<double> raised_cosine_target(std::size_t length, double support);

/// Power envelope: |x|^2 smoothed by a centered circular moving average.
std::vector<double> smoothed_power_envelope(std::span<const double> x, std::size_t window);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Negative central-difference derivative of phase with respect to angular
/// frequency, in samples. `phase` holds bins 0..M-1 of a `dft_length`-point DFT.
std::vector<double> group_delay(std::span<const double> phase, std::size_t dft_length);

/// u[n] = sum_q C_q sum_r b_{q,r} g_q[n - (r-1) N/4], length 3N/4 + max unit length.
std::vector<double> build_base_unit(const std::array<std::span<const double>, 3>& units, std::size_t period);

/// Overlap-adds P copies of the base unit at period spacing and excerpts the
/// period starting at (P/2 - 1) N. P must be even and >= 8.
std::vector<double> build_periodic_period(const std::array<std::span<const double>, 3>& units,
                                          std::size_t period, std::size_t repetitions);

struct StructuredTestSignal {
    PeriodicSignal period;
    std::array<std::uint64_t, 3> unit_seeds{};
    TransitionShape shape = TransitionShape::Erf;
    double effective_width = 0.0;
    std::size_t repetitions_built = 0;
    std::size_t transition_count = 0;  ///< per unit
    bool negated = false;
};

/// Default unit effective width for a period: 0.4 N / fs.
double default_effective_width(std::size_t period, int sample_rate) noexcept;

/// Builds three units of length N from the given seeds and structures them.
StructuredTestSignal build_periodic_test_signal(const std::array<std::uint64_t, 3>& seeds, std::size_t period,
                                                std::size_t repetitions, int sample_rate,
                                                TransitionShape shape = TransitionShape::Erf,
                                                double effective_width = 0.0);

/// Sign-flipped copy (for even-nonlinearity detection).
StructuredTestSignal negated(const StructuredTestSignal& s);

struct SpectralTarget {
    enum class Kind { Flat, Pink, Custom };
    Kind kind = Kind::Flat;
    std::vector<double> magnitude;  ///< Custom only: one-sided, N/2 + 1 values

    static SpectralTarget flat() { return {}; }
    static SpectralTarget pink() { return {Kind::Pink, {}}; }
    static SpectralTarget custom(std::vector<double> magnitude) { return {Kind::Custom, std::move(magnitude)}; }
};

std::string describe(const SpectralTarget& target);

/// Replaces |P[k]| by the target magnitude (phase kept), zeroes DC, and
/// peak-normalizes the period to 0.9 full scale.
PeriodicSignal shape_spectrum(const PeriodicSignal& p, const SpectralTarget& target);

/// One-sided target magnitude for a period length N (DC entry is zero).
std::vector<double> target_magnitude(const SpectralTarget& target, std::size_t period);

/// Linear swept sine (TSP) built in the frequency domain: |DFT| = 1 at every
/// bin and group delay rising linearly from N/4 to 3N/4 across 0..fs/2.
PeriodicSignal gen_swept_sine(std::size_t period, int sample_rate);

}  // namespace capmeas
