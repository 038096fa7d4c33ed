#include "capmeas/estimator.hpp"

#include "capmeas/errors.hpp"
#include "capmeas/fft.hpp"
#include "capmeas/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace capmeas {

namespace {

constexpr double kZeroBin = 1e-300;

using HalfSpectrum = std::vector<Complex>;

std::vector<Complex> mirror(const HalfSpectrum& half, std::size_t n) {
    std::vector<Complex> full(n);
    for (std::size_t k = 0; k < half.size() && k < n; ++k) full[k] = half[k];
    for (std::size_t k = half.size(); k < n; ++k) full[k] = std::conj(full[n - k]);
    return full;
}

// Zero-mean excitations (spectrally shaped signals have DC removed) carry
// no information at DC; that bin is then reported as H[0] = 0 instead of
// dividing rounding noise.
bool dc_excluded(const HalfSpectrum& x) {
    double peak = 0.0;
    for (const auto& v : x) peak = std::max(peak, std::abs(v));
    return std::abs(x[0]) <= 1e-9 * peak;
}

void require_nonzero(const HalfSpectrum& x) {
    std::vector<std::size_t> bad;
    for (std::size_t k = dc_excluded(x) ? 1 : 0; k < x.size(); ++k)
        if (std::abs(x[k]) < kZeroBin) bad.push_back(k);
    if (!bad.empty()) throw ZeroBinError(ErrorKind::SafeguardRequired, std::move(bad));
}

void divide_in_place(HalfSpectrum& y, const HalfSpectrum& x) {
    const bool skip_dc = dc_excluded(x);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = (k == 0 && skip_dc) ? Complex(0.0) : y[k] / x[k];
}

}  // namespace

std::string to_string(EstimateMethod method) {
    switch (method) {
        case EstimateMethod::Linear: return "linear";
        case EstimateMethod::Periodic: return "periodic";
        case EstimateMethod::SimultaneousLong: return "simultaneous-long";
        case EstimateMethod::SimultaneousShort: return "simultaneous-short";
    }
    return "linear";
}

TransferEstimate estimate_lti_linear(const Signal& x, const Signal& y, std::size_t max_ir_len) {
    if (max_ir_len == 0) throw Error(ErrorKind::InvalidLength, "expected response length must be positive");
    if (x.sample_rate() != y.sample_rate()) throw Error(ErrorKind::InvalidInput, "sample rates differ");
    const std::size_t length = next_pow2(x.size() + max_ir_len - 1);
    // Output beyond L cannot belong to a response of max_ir_len taps.
    const auto ys = y.samples().subspan(0, std::min(y.size(), length));
    const Spectrum X = dft(x.samples(), length, x.sample_rate());
    const Spectrum Y = dft(ys, length, y.sample_rate());
    Spectrum H = [&] {
        try {
            return spectral_divide(Y, X);
        } catch (const ZeroBinError& e) {
            throw ZeroBinError(ErrorKind::SafeguardRequired, e.bins());
        }
    }();
    auto ir = idft(H);
    ir.resize(max_ir_len);
    return {std::move(H), std::move(ir), EstimateMethod::Linear, 0};
}

TransferEstimate estimate_lti_periodic(const PeriodicSignal& x, std::span<const double> y_segment) {
    if (y_segment.size() != x.size()) throw Error(ErrorKind::InvalidLength, "segment must hold exactly one period");
    const auto X = fft::forward_real(x.period());
    require_nonzero(X);
    auto Y = fft::forward_real(y_segment);
    divide_in_place(Y, X);
    auto ir = fft::inverse_real(Y, x.size());
    return {Spectrum(mirror(Y, x.size()), x.sample_rate()), std::move(ir), EstimateMethod::Periodic, 0};
}

RepetitionResult estimate_with_repetitions(const PeriodicSignal& x, const Signal& acquired, std::size_t discard_head) {
    if (acquired.sample_rate() != x.sample_rate()) throw Error(ErrorKind::InvalidInput, "sample rates differ");
    const std::size_t n = x.size();
    const std::size_t whole = acquired.size() / n;
    if (whole < discard_head + 2)
        throw Error(ErrorKind::InsufficientData, "need at least " + std::to_string(discard_head + 2) +
                                                     " whole periods, got " + std::to_string(whole));
    const std::size_t count = whole - discard_head;
    const auto X = fft::forward_real(x.period());
    require_nonzero(X);

    std::vector<HalfSpectrum> H(count);
    std::vector<std::vector<double>> h(count);
    parallel_for(count, [&](std::size_t p) {
        auto Y = fft::forward_real(acquired.samples().subspan((discard_head + p) * n, n));
        divide_in_place(Y, X);
        h[p] = fft::inverse_real(Y, n);
        H[p] = std::move(Y);
    });

    const std::size_t bins = X.size();
    const double inv = 1.0 / static_cast<double>(count);
    const double inv_dof = 1.0 / static_cast<double>(count - 1);
    HalfSpectrum mean(bins, 0.0);
    std::vector<double> mean_ir(n, 0.0);
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t k = 0; k < bins; ++k) mean[k] += H[p][k];
        for (std::size_t i = 0; i < n; ++i) mean_ir[i] += h[p][i];
    }
    for (auto& v : mean) v *= inv;
    for (auto& v : mean_ir) v *= inv;

    RepetitionResult r{Spectrum(mirror(mean, n), x.sample_rate()), {}, std::vector<double>(bins, 0.0),
                       std::vector<double>(n, 0.0), count};
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t k = 0; k < bins; ++k) r.rtv_level[k] += std::norm(H[p][k] - mean[k]);
        for (std::size_t i = 0; i < n; ++i) r.rtv_ir[i] += (h[p][i] - mean_ir[i]) * (h[p][i] - mean_ir[i]);
    }
    for (auto& v : r.rtv_level) v *= inv_dof;
    for (auto& v : r.rtv_ir) v *= inv_dof;
    r.mean_ir = std::move(mean_ir);
    return r;
}

std::vector<double> virtual_target(int q, std::size_t period) {
    if (q < 1 || q > 3) throw Error(ErrorKind::InvalidInput, "unit index must be 1, 2 or 3");
    if (period < 4 || period % 4 != 0) throw Error(ErrorKind::InvalidPeriod, "period must be a positive multiple of 4");
    std::vector<double> v(period, 0.0);
    for (std::size_t r = 0; r < 4; ++r) v[r * period / 4] = kHadamard4[static_cast<std::size_t>(q - 1)][r];
    return v;
}

Complex selector_gain(int q, std::size_t k) noexcept {
    // exp(-j pi k r / 2) cycles through 1, -j, -1, j.
    static constexpr Complex kTurn[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    Complex a = 0.0;
    for (std::size_t r = 0; r < 4; ++r) a += static_cast<double>(kHadamard4[static_cast<std::size_t>(q - 1)][r]) * kTurn[(k * r) % 4];
    return a;
}

SimultaneousResult estimate_simultaneous(const PeriodicSignal& s, const Signal& acquired, std::size_t discard_head) {
    const std::size_t n = s.size();
    if (n < 4 || n % 4 != 0) throw Error(ErrorKind::InvalidPeriod, "period must be a positive multiple of 4");
    auto reps = estimate_with_repetitions(s, acquired, discard_head);
    TransferEstimate long_response{reps.mean_H, reps.mean_ir, EstimateMethod::SimultaneousLong, 0};
    SimultaneousResult out{std::move(long_response), {}, std::move(reps), {}};
    const auto& rep = out.repetitions;

    const std::size_t slot = n / 4;
    const std::size_t bins = n / 2 + 1;
    const auto mean = rep.mean_H.bins();
    for (int q = 1; q <= 3; ++q) {
        HalfSpectrum sel(bins);
        for (std::size_t k = 0; k < bins; ++k) sel[k] = selector_gain(q, k) * mean[k];
        auto h = fft::inverse_real(sel, n);
        h.resize(slot);
        out.short_responses[static_cast<std::size_t>(q - 1)] = std::move(h);
    }

    SdtiResult& sd = out.sdti;
    sd.source = SdtiResult::Source::Orthogonal;
    sd.mean_ir.assign(slot, 0.0);
    sd.sdti_ir.assign(slot, 0.0);
    sd.sdti_level.assign(bins, 0.0);
    for (const auto& h : out.short_responses) {
        std::vector<double> dev(n, 0.0);
        for (std::size_t i = 0; i < slot; ++i) {
            dev[i] = h[i] - rep.mean_ir[i];
            sd.mean_ir[i] += h[i] / 3.0;
            sd.sdti_ir[i] += dev[i] * dev[i] / 3.0;
        }
        const auto D = fft::forward_real(dev);
        for (std::size_t k = 0; k < bins; ++k) sd.sdti_level[k] += std::norm(D[k]) / 3.0;
    }
    return out;
}

SdtiResult serial_sdti(const std::vector<std::vector<double>>& responses) {
    if (responses.size() < 2) throw Error(ErrorKind::InsufficientData, "serial SDTI needs at least two responses");
    const std::size_t len = responses.front().size();
    if (len == 0) throw Error(ErrorKind::InvalidLength, "responses must not be empty");
    for (const auto& r : responses)
        if (r.size() != len) throw Error(ErrorKind::InvalidLength, "responses must have equal lengths");

    const double inv = 1.0 / static_cast<double>(responses.size());
    const double inv_dof = 1.0 / static_cast<double>(responses.size() - 1);
    SdtiResult sd;
    sd.source = SdtiResult::Source::Serial;
    sd.mean_ir.assign(len, 0.0);
    for (const auto& r : responses)
        for (std::size_t i = 0; i < len; ++i) sd.mean_ir[i] += r[i];
    for (auto& v : sd.mean_ir) v *= inv;

    sd.sdti_ir.assign(len, 0.0);
    for (const auto& r : responses)
        for (std::size_t i = 0; i < len; ++i) sd.sdti_ir[i] += (r[i] - sd.mean_ir[i]) * (r[i] - sd.mean_ir[i]);
    for (auto& v : sd.sdti_ir) v *= inv_dof;

    const auto M = fft::forward_real(sd.mean_ir);
    sd.sdti_level.assign(M.size(), 0.0);
    for (const auto& r : responses) {
        const auto R = fft::forward_real(r);
        for (std::size_t k = 0; k < M.size(); ++k) sd.sdti_level[k] += std::norm(R[k] - M[k]);
    }
    for (auto& v : sd.sdti_level) v *= inv_dof;
    return sd;
}

std::vector<double> even_component(std::span<const double> h_pos, std::span<const double> h_neg) {
    if (h_pos.size() != h_neg.size()) throw Error(ErrorKind::InvalidLength, "responses must have equal lengths");
    std::vector<double> out(h_pos.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (h_pos[i] - h_neg[i]);
    return out;
}

std::vector<double> odd_component(std::span<const double> h_pos, std::span<const double> h_neg) {
    if (h_pos.size() != h_neg.size()) throw Error(ErrorKind::InvalidLength, "responses must have equal lengths");
    std::vector<double> out(h_pos.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (h_pos[i] + h_neg[i]);
    return out;
}

void SafeguardConfig::validate() const {
    if (!(relative_threshold_db > 0.0)) throw Error(ErrorKind::InvalidInput, "relative threshold must be > 0 dB");
    if (!(absolute_floor_db > 0.0)) throw Error(ErrorKind::InvalidInput, "absolute floor must be > 0 dB");
    if (!(low_freq_limit_hz >= 0.0)) throw Error(ErrorKind::InvalidInput, "low-frequency limit must be >= 0 Hz");
    if (!(smoothing_width > 0.0)) throw Error(ErrorKind::InvalidInput, "smoothing width must be > 0 octaves");
}

std::vector<double> safeguard_threshold(const Spectrum& X, std::optional<std::span<const double>> noise_power,
                                        const SafeguardConfig& cfg) {
    cfg.validate();
    const std::size_t n = X.size();
    const std::size_t half = n / 2 + 1;
    const auto power = X.one_sided_power();
    const auto smoothed = fractional_octave_smooth(power, cfg.smoothing_width);
    double peak = 0.0;
    for (const auto& b : X.bins()) peak = std::max(peak, std::abs(b));

    std::vector<double> noise_floor;
    if (noise_power) {
        if (noise_power->size() != half)
            throw Error(ErrorKind::InvalidInput, "noise power must have L/2 + 1 entries");
        noise_floor = fractional_octave_smooth(*noise_power, cfg.smoothing_width);
        for (auto& v : noise_floor) v = std::sqrt(v);
    }

    const double relative = std::pow(10.0, -cfg.relative_threshold_db / 20.0);
    const double floor = peak * std::pow(10.0, -cfg.absolute_floor_db / 20.0);
    std::vector<double> theta_half(half);
    for (std::size_t k = 0; k < half; ++k) {
        if (X.frequency(k) < cfg.low_freq_limit_hz) {
            theta_half[k] = floor;
            continue;
        }
        double t = std::max(std::sqrt(smoothed[k]) * relative, floor);
        if (!noise_floor.empty()) t = std::max(t, noise_floor[k]);
        theta_half[k] = t;
    }
    std::vector<double> theta(n);
    for (std::size_t k = 0; k < n; ++k) theta[k] = theta_half[std::min(k, n - k)];
    return theta;
}

Spectrum safeguard(const Spectrum& X, std::span<const double> theta) {
    const std::size_t n = X.size();
    if (theta.size() != n) throw Error(ErrorKind::InvalidInput, "threshold must have one entry per bin");
    // Magnitudes within a few ulps of theta count as reaching it; otherwise a
    // second pass would rescale by rounding noise and break idempotence.
    constexpr double kSlack = 1.0 - 8.0 * std::numeric_limits<double>::epsilon();
    std::vector<Complex> out(X.bins().begin(), X.bins().end());
    for (std::size_t k = 0; k < n; ++k) {
        const double t = theta[k];
        if (!(t > 0.0) || !std::isfinite(t)) {
            if (k == 0) continue;  // DC is exempt
            throw Error(ErrorKind::InvalidThreshold, "threshold must be positive at bin " + std::to_string(k));
        }
        const double a = std::abs(out[k]);
        if (a == 0.0)
            out[k] = t;
        else if (a < t * kSlack)
            out[k] *= t / a;
    }
    return Spectrum(std::move(out), X.sample_rate());
}

Spectrum safeguarded_transfer(const Spectrum& Y_s, const Spectrum& X_s) { return spectral_divide(Y_s, X_s); }

SafeguardedSignal make_safeguarded_signal(std::span<const double> x, std::size_t period, int sample_rate,
                                          const SafeguardConfig& cfg,
                                          std::optional<std::span<const double>> noise_power) {
    if (x.empty()) throw Error(ErrorKind::InvalidLength, "input signal is empty");
    if (x.size() > period) throw Error(ErrorKind::InvalidLength, "input longer than the period");
    const Spectrum X = dft(x, period, sample_rate);
    const auto theta = safeguard_threshold(X, noise_power, cfg);
    const Spectrum Xs = safeguard(X, theta);
    SafeguardedSignal out{PeriodicSignal(idft(Xs), sample_rate), {}, {}};
    const std::size_t half = period / 2 + 1;
    out.threshold.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(half));
    out.original_magnitude.resize(half);
    for (std::size_t k = 0; k < half; ++k) out.original_magnitude[k] = std::abs(X[k]);
    return out;
}

}  // namespace capmeas
