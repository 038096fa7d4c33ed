#pragma once

// Discrete-time signal and spectrum primitives.
//
// DFT convention used throughout the library: the forward transform is
// unnormalized, X[k] = sum_n x[n] exp(-j 2 pi k n / L), and the inverse carries
// the 1/L factor. Spectra are stored two-sided (L bins); one-sided views
// (L/2 + 1 bins) are produced only for display and smoothing.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace capmeas {

using Complex = std::complex<double>;

/// Level assigned to exactly-zero power so logarithms stay finite.
inline constexpr double kDbFloor = -200.0;

class Signal {
public:
    Signal(std::vector<double> samples, int sample_rate);

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    int sample_rate() const noexcept { return sample_rate_; }
    double operator[](std::size_t n) const { return samples_[n]; }

    std::vector<double> release() && { return std::move(samples_); }

private:
    std::vector<double> samples_;
    int sample_rate_;
};

class Spectrum {
public:
    Spectrum(std::vector<Complex> bins, int sample_rate);

    std::span<const Complex> bins() const noexcept { return bins_; }
    std::size_t size() const noexcept { return bins_.size(); }
    int sample_rate() const noexcept { return sample_rate_; }
    const Complex& operator[](std::size_t k) const { return bins_[k]; }

    /// Frequency in Hz of bin k.
    double frequency(std::size_t k) const noexcept {
        return static_cast<double>(k) * sample_rate_ / static_cast<double>(bins_.size());
    }

    /// |X[k]|^2 for k = 0..L/2.
    std::vector<double> one_sided_power() const;

private:
    std::vector<Complex> bins_;
    int sample_rate_;
};

/// One period of a periodic signal.
class PeriodicSignal {
public:
    PeriodicSignal(std::vector<double> period, int sample_rate);

    std::span<const double> period() const noexcept { return period_; }
    std::size_t size() const noexcept { return period_.size(); }
    int sample_rate() const noexcept { return sample_rate_; }

    /// Concatenation of `count` periods.
    std::vector<double> repeated(std::size_t count) const;

private:
    std::vector<double> period_;
    int sample_rate_;
};

/// Forward DFT of `x` zero-extended to `length` bins.
Spectrum dft(std::span<const double> x, std::size_t length, int sample_rate = 1);

/// Inverse DFT of a conjugate-symmetric spectrum. Throws AsymmetricSpectrum
/// when the symmetry residual exceeds 1e-9 of the largest bin magnitude.
std::vector<double> idft(const Spectrum& spectrum);

/// Moves sample n to (n + shift) mod N.
std::vector<double> cyclic_shift(std::span<const double> x, long long shift);
PeriodicSignal cyclic_shift(const PeriodicSignal& p, long long shift);

/// Bin-wise ratio Y[k] / X[k]. Any |X[k]| < 1e-300 raises a ZeroBinError
/// (ZeroDenominator) listing the offending bins.
Spectrum spectral_divide(const Spectrum& numerator, const Spectrum& denominator);

/// Fractional-octave smoothing of a one-sided power sequence: bin k becomes
/// the mean over bins [k 2^(-w/2), k 2^(w/2)]. Bin 0 passes through.
std::vector<double> fractional_octave_smooth(std::span<const double> power, double width_octaves);

inline std::vector<double> third_octave_smooth(std::span<const double> power) {
    return fractional_octave_smooth(power, 1.0 / 3.0);
}

/// 10 log10 of the centered moving average of x^2 (edges averaged over the
/// available samples), floored at kDbFloor.
std::vector<double> rms_envelope_db(std::span<const double> x, std::size_t window_len);

double power_to_db(double power) noexcept;
double magnitude_to_db(double magnitude) noexcept;

std::size_t next_pow2(std::size_t n) noexcept;

}  // namespace capmeas
