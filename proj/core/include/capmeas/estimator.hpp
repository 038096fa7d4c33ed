#pragma once

// Transfer-function estimation.
//
//  linear:       one-shot, zero-padded to avoid circular wrap
//  periodic:     one steady-state period against one period of the excitation
//  repetitions:  per-period estimates, their mean, and the spread across
//                periods (random and time-varying component, RTV)
//  simultaneous: three-unit orthogonal test signal; the long response uses
//                all bins, each short response only the bins of one unit.
//                Disagreement between them is the signal-dependent part (SDTI).
//
// The periodic estimators report H[0] = 0 when the excitation has no DC
// content (|X[0]| <= 1e-9 of the peak bin), as after spectral shaping.

#include "capmeas/capricep.hpp"
#include "capmeas/signal_core.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace capmeas {

enum class EstimateMethod { Linear, Periodic, SimultaneousLong, SimultaneousShort };

std::string to_string(EstimateMethod method);

struct TransferEstimate {
    Spectrum H;
    std::vector<double> impulse_response;
    EstimateMethod method = EstimateMethod::Linear;
    int unit = 0;  ///< 1..3 for SimultaneousShort
};

/// Zero-padded estimate with L = next_pow2(len(x) + max_ir_len - 1). The
/// response is truncated to max_ir_len samples. Vanishing |X[k]| raises a
/// ZeroBinError of kind SafeguardRequired.
TransferEstimate estimate_lti_linear(const Signal& x, const Signal& y, std::size_t max_ir_len);

/// H = DFT(y_segment) / DFT(period); y_segment must hold exactly one period.
TransferEstimate estimate_lti_periodic(const PeriodicSignal& x, std::span<const double> y_segment);

struct RepetitionResult {
    Spectrum mean_H;
    std::vector<double> mean_ir;
    std::vector<double> rtv_level;  ///< per bin, one-sided: sample variance of H_p[k]
    std::vector<double> rtv_ir;     ///< per sample: sample variance of h_p[n]
    std::size_t periods_used = 0;
};

/// Splits `acquired` into whole periods, drops `discard_head` leading ones
/// and any trailing partial period, and estimates per period.
RepetitionResult estimate_with_repetitions(const PeriodicSignal& x, const Signal& acquired,
                                           std::size_t discard_head = 1);

/// v_q[n] = sum_r b_{q,r} delta[n - (r-1) N/4], q in 1..3.
std::vector<double> virtual_target(int q, std::size_t period);

/// DFT of the virtual target: A_q[k] = sum_r b_{q,r} exp(-j 2 pi k (r-1) / 4).
Complex selector_gain(int q, std::size_t k) noexcept;

struct SdtiResult {
    enum class Source { Serial, Orthogonal };
    std::vector<double> mean_ir;
    std::vector<double> sdti_ir;     ///< per sample
    std::vector<double> sdti_level;  ///< per bin, one-sided (orthogonal: on the N-point grid)
    Source source = Source::Serial;
};

struct SimultaneousResult {
    TransferEstimate long_response;            ///< from the period-averaged spectrum
    std::array<std::vector<double>, 3> short_responses;  ///< N/4 samples each
    RepetitionResult repetitions;
    SdtiResult sdti;
};

/// Simultaneous estimation with a three-unit orthogonal test signal. Each
/// short response is the first N/4 samples of idft(A_q Y / S); no rescaling is
/// needed because A_q restricts the spectrum to the unit's bins and the first
/// slot of every virtual target carries +1. SDTI is the mean square deviation
/// of the short responses from the first N/4 samples of the long response.
SimultaneousResult estimate_simultaneous(const PeriodicSignal& s, const Signal& acquired,
                                         std::size_t discard_head = 1);

/// Element-wise mean and sample variance of repetition-averaged responses
/// measured with different test signals.
SdtiResult serial_sdti(const std::vector<std::vector<double>>& responses);

/// (h_pos - h_neg) / 2 where h_neg was measured with the negated signal and
/// already divided by the negated spectrum.
std::vector<double> even_component(std::span<const double> h_pos, std::span<const double> h_neg);
/// (h_pos + h_neg) / 2.
std::vector<double> odd_component(std::span<const double> h_pos, std::span<const double> h_neg);

struct SafeguardConfig {
    double relative_threshold_db = 20.0;  ///< below the smoothed magnitude
    double absolute_floor_db = 80.0;      ///< below the spectral peak
    double low_freq_limit_hz = 20.0;
    double smoothing_width = 1.0 / 3.0;   ///< octaves

    void validate() const;
};

/// Frequency-dependent threshold for all L bins (mirror-symmetric). The
/// optional noise power (one-sided, L/2 + 1 values, same scale as |X|^2)
/// contributes the square root of its smoothed level as a further floor.
std::vector<double> safeguard_threshold(const Spectrum& X, std::optional<std::span<const double>> noise_power,
                                        const SafeguardConfig& cfg);

/// Raises |X[k]| to theta[k] where it falls short, keeping the phase; exact
/// zeros become theta[k]. theta has L entries.
Spectrum safeguard(const Spectrum& X, std::span<const double> theta);

Spectrum safeguarded_transfer(const Spectrum& Y_s, const Spectrum& X_s);

struct SafeguardedSignal {
    PeriodicSignal period;
    std::vector<double> threshold;  ///< one-sided
    std::vector<double> original_magnitude;  ///< one-sided
};

/// Zero-pads `x` to `period` samples, safeguards its spectrum, and returns
/// the resulting period.
SafeguardedSignal make_safeguarded_signal(std::span<const double> x, std::size_t period, int sample_rate,
                                          const SafeguardConfig& cfg,
                                          std::optional<std::span<const double>> noise_power = std::nullopt);

}  // namespace capmeas
