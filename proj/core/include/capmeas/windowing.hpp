#pragma once

// Periodicity-preserving truncation weights.
//
// A weighting spans `span` periods of length N and sums to exactly one when
// folded modulo N, so folding a weighted multi-period excerpt reproduces a
// periodic component unchanged while attenuating components that are not
// synchronous with the period.

#include <cstddef>
#include <span>
#include <vector>

namespace capmeas {

struct WeightingFunction {
    std::vector<double> coeffs;
    std::size_t period_len = 0;
    std::size_t span = 0;
    std::vector<double> samples;  ///< span * period_len values
};

/// w[n] = sum_m coeffs[m] cos(2 pi m n / width), n in [0, width).
std::vector<double> cosine_series_window(std::span<const double> coeffs, std::size_t width);

/// Cosine prototype of width (span - 1) N convolved with a length-N
/// rectangle, scaled so the wrapped sum is one.
WeightingFunction periodic_weighting(std::span<const double> coeffs, std::size_t period_len,
                                     std::size_t span = 2);

/// out[n] = sum_p segment[n + pN] w[n + pN].
std::vector<double> fold_to_period(std::span<const double> segment, const WeightingFunction& w);

/// Highest side-lobe of the zero-padded DFT relative to the main-lobe peak,
/// in dB. The main lobe ends at the first local minimum of the magnitude.
double max_sidelobe_db(std::span<const double> window);
double max_sidelobe_db(const WeightingFunction& w);

struct OptimizedWeighting {
    std::vector<double> coeffs;  ///< coeffs[0] == 1
    double sidelobe_db = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

/// Minimizes max_sidelobe_db(periodic_weighting(c, N, span)) over the k - 1
/// free ratios c[1..k-1] with c[0] = 1. Nelder-Mead, 8 deterministic starts,
/// 2000 evaluations per start. The k - 1 optimum (extended with a zero term)
/// is always one of the starts, so results are non-increasing in k.
OptimizedWeighting optimize_weighting(std::size_t k, std::size_t period_len, std::size_t span = 2);

/// Results for k = 1..k_max computed in one warm-started sweep.
std::vector<OptimizedWeighting> optimize_weighting_series(std::size_t k_max, std::size_t period_len,
                                                          std::size_t span = 2);

}  // namespace capmeas
