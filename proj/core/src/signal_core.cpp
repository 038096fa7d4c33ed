#include "capmeas/signal_core.hpp"

#include "capmeas/errors.hpp"
#include "capmeas/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace capmeas {

Signal::Signal(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (samples_.empty()) throw Error(ErrorKind::InvalidLength, "signal must have at least one sample");
    if (sample_rate_ <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
    for (double v : samples_) {
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "signal contains non-finite samples");
    }
}

Spectrum::Spectrum(std::vector<Complex> bins, int sample_rate)
    : bins_(std::move(bins)), sample_rate_(sample_rate) {
    if (bins_.size() < 2) throw Error(ErrorKind::InvalidLength, "spectrum needs at least two bins");
    if (sample_rate_ <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
}

std::vector<double> Spectrum::one_sided_power() const {
    std::vector<double> out(bins_.size() / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(bins_[k]);
    return out;
}

PeriodicSignal::PeriodicSignal(std::vector<double> period, int sample_rate)
    : period_(std::move(period)), sample_rate_(sample_rate) {
    if (period_.empty()) throw Error(ErrorKind::InvalidLength, "period must have at least one sample");
    if (sample_rate_ <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
}

std::vector<double> PeriodicSignal::repeated(std::size_t count) const {
    std::vector<double> out;
    out.reserve(period_.size() * count);
    for (std::size_t i = 0; i < count; ++i) out.insert(out.end(), period_.begin(), period_.end());
    return out;
}

Spectrum dft(std::span<const double> x, std::size_t length, int sample_rate) {
    if (length == 0) throw Error(ErrorKind::InvalidLength, "DFT length must be positive");
    if (length < x.size()) throw Error(ErrorKind::InvalidLength, "DFT length shorter than the signal");
    std::vector<double> padded(length, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    auto half = fft::forward_real(padded);
    std::vector<Complex> bins(length);
    for (std::size_t k = 0; k < half.size(); ++k) bins[k] = half[k];
    for (std::size_t k = half.size(); k < length; ++k) bins[k] = std::conj(bins[length - k]);
    return Spectrum(std::move(bins), sample_rate);
}

std::vector<double> idft(const Spectrum& spectrum) {
    const std::size_t n = spectrum.size();
    const auto bins = spectrum.bins();
    double peak = 0.0;
    double residual = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        peak = std::max(peak, std::abs(bins[k]));
        residual = std::max(residual, std::abs(bins[k] - std::conj(bins[(n - k) % n])));
    }
    if (residual > 1e-9 * peak) {
        throw Error(ErrorKind::AsymmetricSpectrum,
                    "conjugate-symmetry residual " + std::to_string(residual / peak) + " (relative)");
    }
    // Real part of the full inverse equals the inverse of the Hermitian part.
    std::vector<Complex> half(n / 2 + 1);
    for (std::size_t k = 0; k < half.size(); ++k) half[k] = 0.5 * (bins[k] + std::conj(bins[(n - k) % n]));
    return fft::inverse_real(half, n);
}

std::vector<double> cyclic_shift(std::span<const double> x, long long shift) {
    const auto n = static_cast<long long>(x.size());
    std::vector<double> out(x.size());
    if (n == 0) return out;
    const long long s = ((shift % n) + n) % n;
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>((i + s) % n)] = x[static_cast<std::size_t>(i)];
    return out;
}

PeriodicSignal cyclic_shift(const PeriodicSignal& p, long long shift) {
    return PeriodicSignal(cyclic_shift(p.period(), shift), p.sample_rate());
}

Spectrum spectral_divide(const Spectrum& numerator, const Spectrum& denominator) {
    if (numerator.size() != denominator.size())
        throw Error(ErrorKind::InvalidInput, "spectral_divide: length mismatch");
    if (numerator.sample_rate() != denominator.sample_rate())
        throw Error(ErrorKind::InvalidInput, "spectral_divide: sample-rate mismatch");
    std::vector<std::size_t> zero_bins;
    std::vector<Complex> out(numerator.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (std::abs(denominator[k]) < 1e-300) {
            zero_bins.push_back(k);
            continue;
        }
        out[k] = numerator[k] / denominator[k];
    }
    if (!zero_bins.empty()) throw ZeroBinError(ErrorKind::ZeroDenominator, std::move(zero_bins));
    return Spectrum(std::move(out), numerator.sample_rate());
}

std::vector<double> fractional_octave_smooth(std::span<const double> power, double width_octaves) {
    if (!(width_octaves > 0.0) || !std::isfinite(width_octaves))
        throw Error(ErrorKind::InvalidInput, "smoothing width must be positive");
    for (double v : power) {
        if (!(v >= 0.0)) throw Error(ErrorKind::InvalidInput, "power must be nonnegative");
    }
    const std::size_t m = power.size();
    std::vector<double> prefix(m + 1, 0.0);
    for (std::size_t k = 0; k < m; ++k) prefix[k + 1] = prefix[k] + power[k];

    std::vector<double> out(m);
    if (m == 0) return out;
    out[0] = power[0];
    const double lo_ratio = std::exp2(-0.5 * width_octaves);
    const double hi_ratio = std::exp2(0.5 * width_octaves);
    constexpr double kEdgeSlack = 1e-9;
    for (std::size_t k = 1; k < m; ++k) {
        const double kd = static_cast<double>(k);
        auto lo = static_cast<std::size_t>(std::ceil(kd * lo_ratio - kEdgeSlack));
        auto hi = static_cast<std::size_t>(std::floor(kd * hi_ratio + kEdgeSlack));
        lo = std::max<std::size_t>(lo, 1);
        hi = std::min(hi, m - 1);
        out[k] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<double> rms_envelope_db(std::span<const double> x, std::size_t window_len) {
    if (window_len == 0) throw Error(ErrorKind::InvalidInput, "window length must be at least 1");
    const std::size_t n = x.size();
    const std::size_t before = (window_len - 1) / 2;
    const std::size_t after = window_len / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= before ? i - before : 0;
        const std::size_t hi = std::min(n - 1, i + after);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += x[j] * x[j];
        out[i] = power_to_db(acc / static_cast<double>(hi - lo + 1));
    }
    return out;
}

double power_to_db(double power) noexcept {
    if (!(power > 0.0)) return kDbFloor;
    return std::max(kDbFloor, 10.0 * std::log10(power));
}

double magnitude_to_db(double magnitude) noexcept { return power_to_db(magnitude * magnitude); }

std::size_t next_pow2(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace capmeas
