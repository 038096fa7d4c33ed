#include "capmeas/capricep.hpp"

#include "capmeas/errors.hpp"
#include "capmeas/fft.hpp"
#include "capmeas/parallel.hpp"
#include "capmeas/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace capmeas {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSigmoidSlope = 1.2036;  // logistic fit to erf: 1.702 * sqrt(2) / 2

// Minimum correlation between the ensemble power envelope and the raised-cosine
// target accepted by the calibration.
constexpr double kCalibrationCorrelation = 0.95;
// Calibration fails if even the densest rung stays below this.
constexpr double kCalibrationFloor = 0.9;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

double transition(TransitionShape shape, double u) { return 2.0 * phase_transition(shape, u); }

// Half-width (in units of u) beyond which the transition equals +-pi to
// double precision. Zero means the profile never saturates.
double saturation_radius(TransitionShape shape) {
    switch (shape) {
        case TransitionShape::Erf: return 6.0;
        case TransitionShape::Sigmoid: return 17.0;
        case TransitionShape::Iir: return 0.0;
    }
    return 0.0;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

// I(mu) = integral over t of 1 - cos(Phi(t + mu) - Phi(t)). For random
// transitions of density rho (per bin) and width w, the spectrum
// autocorrelation at lag m is exp(-rho w I(m / w)).
double decorrelation_integral(TransitionShape shape, double mu) {
    if (mu == 0.0) return 0.0;
    // Symmetric form: 2 * integral_0^inf of 1 - cos(Phi(s + mu/2) - Phi(s - mu/2)).
    auto f = [&](double s) { return 1.0 - std::cos(transition(shape, s + 0.5 * mu) - transition(shape, s - 0.5 * mu)); };
    const double half = 0.5 * mu;
    double total = 0.0;
    // Pieces: between the two transitions, around the outer transition, tail.
    const double near = 12.0;
    const double a = std::max(0.0, half - near);
    total += integrate(f, 0.0, a, 1e-10) + integrate(f, a, half + near, 1e-10);
    double lo = half + near;
    for (double width = 32.0; width < 1e6; width *= 4.0) {
        const double piece = integrate(f, lo, lo + width, 1e-11);
        total += piece;
        lo += width;
        if (piece < 1e-12) break;
    }
    return 2.0 * total;
}

class DecorrelationTable {
public:
    explicit DecorrelationTable(TransitionShape shape) {
        for (double mu = 0.0; mu < 20.0; mu += 0.05) add(shape, mu);
        for (double mu = 20.0; mu < 2e6; mu *= 1.02) add(shape, mu);
    }

    double operator()(double mu) const {
        if (mu >= mu_.back()) return value_.back();
        const auto it = std::upper_bound(mu_.begin(), mu_.end(), mu);
        const std::size_t i = static_cast<std::size_t>(it - mu_.begin());
        const double t = (mu - mu_[i - 1]) / (mu_[i] - mu_[i - 1]);
        return value_[i - 1] + t * (value_[i] - value_[i - 1]);
    }

private:
    void add(TransitionShape shape, double mu) {
        mu_.push_back(mu);
        value_.push_back(decorrelation_integral(shape, mu));
    }

    std::vector<double> mu_;
    std::vector<double> value_;
};

const DecorrelationTable& decorrelation_table(TransitionShape shape) {
    static std::mutex mutex;
    static std::map<TransitionShape, DecorrelationTable> tables;
    std::lock_guard lock(mutex);
    auto it = tables.find(shape);
    if (it == tables.end()) it = tables.emplace(shape, DecorrelationTable(shape)).first;
    return it->second;
}

// Expected power envelope (up to scale), centered at L/2.
std::vector<double> ensemble_envelope(const DecorrelationTable& table, double overlap, double width,
                                      std::size_t length) {
    std::vector<std::complex<double>> autocorr(length / 2 + 1);
    for (std::size_t m = 0; m < autocorr.size(); ++m)
        autocorr[m] = std::exp(-overlap * table(static_cast<double>(m) / width));
    auto env = fft::inverse_real(autocorr, length);
    return cyclic_shift(env, static_cast<long long>(length / 2));
}

struct WidthFit {
    double width = 0.0;
    double correlation = -1.0;
};

WidthFit fit_width(const DecorrelationTable& table, double overlap, std::size_t length,
                   std::span<const double> target) {
    auto corr_at = [&](double log_w) {
        return pearson_correlation(ensemble_envelope(table, overlap, std::exp(log_w), length), target);
    };
    const double lo = std::log(0.25), hi = std::log(static_cast<double>(length) / 8.0);
    constexpr int kGrid = 48;
    double best_x = lo, best_c = -2.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = lo + (hi - lo) * i / kGrid;
        const double c = corr_at(x);
        if (c > best_c) {
            best_c = c;
            best_x = x;
        }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    const double step = (hi - lo) / kGrid;
    double a = best_x - step, b = best_x + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double c1 = corr_at(x1), c2 = corr_at(x2);
    for (int it = 0; it < 30; ++it) {
        if (c1 > c2) {
            b = x2;
            x2 = x1;
            c2 = c1;
            x1 = b - g * (b - a);
            c1 = corr_at(x1);
        } else {
            a = x1;
            x1 = x2;
            c1 = c2;
            x2 = a + g * (b - a);
            c2 = corr_at(x2);
        }
    }
    WidthFit fit;
    if (std::max(c1, c2) > best_c) {
        fit.width = std::exp(c1 > c2 ? x1 : x2);
        fit.correlation = std::max(c1, c2);
    } else {
        fit.width = std::exp(best_x);
        fit.correlation = best_c;
    }
    return fit;
}

void validate_unit_args(double effective_width, int sample_rate, std::size_t length) {
    if (!is_pow2(length) || length < 16) throw Error(ErrorKind::InvalidLength, "unit length must be a power of two >= 16");
    if (sample_rate <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
    if (!(effective_width > 0.0)) throw Error(ErrorKind::InvalidInput, "effective width must be positive");
    if (!(effective_width * sample_rate < static_cast<double>(length) / 2.0))
        throw Error(ErrorKind::InvalidInput, "effective width must be shorter than half the unit length");
}

}  // namespace

std::string_view to_string(TransitionShape shape) noexcept {
    switch (shape) {
        case TransitionShape::Erf: return "erf";
        case TransitionShape::Sigmoid: return "sigmoid";
        case TransitionShape::Iir: return "iir";
    }
    return "erf";
}

TransitionShape parse_transition_shape(std::string_view name) {
    if (name == "erf") return TransitionShape::Erf;
    if (name == "sigmoid") return TransitionShape::Sigmoid;
    if (name == "iir") return TransitionShape::Iir;
    throw Error(ErrorKind::InvalidInput, "unknown transition shape '" + std::string(name) + "'");
}

double phase_transition(TransitionShape shape, double u) noexcept {
    switch (shape) {
        case TransitionShape::Erf: return 0.5 * kPi * std::erf(u);
        case TransitionShape::Sigmoid: return 0.5 * kPi * std::tanh(kSigmoidSlope * u);
        case TransitionShape::Iir: return std::atan(std::sqrt(kPi) * u);
    }
    return 0.0;
}

std::vector<double> raised_cosine_target(std::size_t length, double support) {
    std::vector<double> t(length, 0.0);
    const double centre = static_cast<double>(length / 2);
    for (std::size_t n = 0; n < length; ++n) {
        const double d = static_cast<double>(n) - centre;
        if (std::abs(d) < 0.5 * support) t[n] = 0.5 * (1.0 + std::cos(2.0 * kPi * d / support));
    }
    return t;
}

std::vector<double> smoothed_power_envelope(std::span<const double> x, std::size_t window) {
    const std::size_t n = x.size();
    window = std::max<std::size_t>(1, std::min(window, n));
    std::vector<double> power(n);
    for (std::size_t i = 0; i < n; ++i) power[i] = x[i] * x[i];
    // Direct sums: a running sum would cancel to ~1e-15 of the peak and hide
    // the far tails this envelope is used to compare.
    std::vector<double> out(n, 0.0);
    const std::size_t before = (window - 1) / 2;
    parallel_for(n, [&](std::size_t i) {
        std::size_t idx = (i + n - before % n) % n;
        double acc = 0.0;
        for (std::size_t j = 0; j < window; ++j) {
            acc += power[idx];
            if (++idx == n) idx = 0;
        }
        out[i] = acc / static_cast<double>(window);
    });
    return out;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) throw Error(ErrorKind::InvalidInput, "correlation needs equal nonempty inputs");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

CapricepDesign calibrate_capricep(TransitionShape shape, double effective_width, int sample_rate,
                                  std::size_t length) {
    validate_unit_args(effective_width, sample_rate, length);
    const double support = effective_width * sample_rate;

    static std::mutex cache_mutex;
    static std::map<std::tuple<TransitionShape, std::size_t, double>, CapricepDesign> cache;
    const auto key = std::make_tuple(shape, length, support);
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    const auto& table = decorrelation_table(shape);
    const auto target = raised_cosine_target(length, support);

    // Walk the overlap ladder upward (more transitions per width) and refit
    // the width at each step so the envelope keeps the target support.
    static constexpr double kLadder[] = {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0,
                                         6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0};
    CapricepDesign design;
    for (double overlap : kLadder) {
        const auto fit = fit_width(table, overlap, length, target);
        design.overlap = overlap;
        design.transition_width = fit.width;
        design.envelope_correlation = fit.correlation;
        if (fit.correlation >= kCalibrationCorrelation) break;
    }
    if (design.envelope_correlation < kCalibrationFloor) {
        std::ostringstream os;
        os << "envelope correlation " << design.envelope_correlation << " with the raised-cosine target is below "
           << kCalibrationFloor << "; increase the number of transitions or the unit length";
        throw Error(ErrorKind::GenerationFailed, os.str());
    }
    const double density = design.overlap / design.transition_width;
    design.transition_count = static_cast<std::size_t>(std::llround(density * static_cast<double>(length / 2)));
    design.transition_count = std::max<std::size_t>(design.transition_count, 1);

    std::lock_guard lock(cache_mutex);
    cache.emplace(key, design);
    return design;
}

UnitCapricep gen_unit_capricep(std::uint64_t seed, double effective_width, int sample_rate, std::size_t length,
                               TransitionShape shape) {
    validate_unit_args(effective_width, sample_rate, length);
    const auto design = calibrate_capricep(shape, effective_width, sample_rate, length);
    const std::size_t half = length / 2;
    const double w = design.transition_width;

    SplitMix64 rng(seed);
    std::vector<double> centres(design.transition_count);
    std::vector<double> polarity(design.transition_count);
    for (std::size_t i = 0; i < design.transition_count; ++i) {
        centres[i] = rng.uniform_open() * static_cast<double>(half);
        polarity[i] = rng.coin() ? 1.0 : -1.0;
    }

    // Each transition at c is paired with its images at -c, L - c and c - L so
    // that the phase is odd about both DC and Nyquist. Without them, transitions
    // near either end leave a kink in the mirrored spectrum and a slow tail.
    std::vector<double> phase(half + 1, 0.0);
    const double L = static_cast<double>(length);
    const double radius = saturation_radius(shape);
    if (radius > 0.0) {
        // Saturated parts of each term are +-pi; add them through a difference array.
        std::vector<double> level(half + 2, 0.0);
        auto add_term = [&](double centre, double sign) {
            const double lo_d = std::ceil(centre - radius * w);
            const double hi_d = std::floor(centre + radius * w);
            const double top = static_cast<double>(half);
            if (hi_d < 0.0 || lo_d > top) {
                const double v = sign * (hi_d < 0.0 ? kPi : -kPi);
                level[0] += v;
                level[half + 1] -= v;
                return;
            }
            const auto lo = static_cast<std::size_t>(std::max(0.0, lo_d));
            const auto hi = static_cast<std::size_t>(std::min(top, hi_d));
            level[0] -= sign * kPi;
            level[lo] += sign * kPi;
            level[hi + 1] += sign * kPi;
            level[half + 1] -= sign * kPi;
            for (std::size_t k = lo; k <= hi; ++k)
                phase[k] += sign * transition(shape, (static_cast<double>(k) - centre) / w);
        };
        for (std::size_t i = 0; i < centres.size(); ++i) {
            const double c = centres[i];
            add_term(c, polarity[i]);
            add_term(-c, polarity[i]);
            add_term(L - c, polarity[i]);
            add_term(c - L, polarity[i]);
        }
        double acc = 0.0;
        for (std::size_t k = 0; k <= half; ++k) {
            acc += level[k];
            phase[k] += acc;
        }
    } else {
        parallel_for(half + 1, [&](std::size_t k) {
            const double kd = static_cast<double>(k);
            double acc = 0.0;
            for (std::size_t i = 0; i < centres.size(); ++i) {
                const double c = centres[i];
                acc += polarity[i] * (transition(shape, (kd - c) / w) + transition(shape, (kd + c) / w) +
                                      transition(shape, (kd - L + c) / w) + transition(shape, (kd + L - c) / w));
            }
            phase[k] = acc;
        });
    }

    // Unit-magnitude spectrum with a half-length delay so the pulse sits at L/2.
    std::vector<std::complex<double>> spectrum(half + 1);
    for (std::size_t k = 0; k < half; ++k) spectrum[k] = std::polar(1.0, phase[k] - kPi * static_cast<double>(k));
    spectrum[0] = 1.0;
    spectrum[half] = std::cos(phase[half] - kPi * static_cast<double>(half)) >= 0.0 ? 1.0 : -1.0;

    UnitCapricep unit;
    unit.response = fft::inverse_real(spectrum, length);
    unit.phase = std::move(phase);
    unit.effective_width = effective_width;
    unit.transition_count = design.transition_count;
    unit.transition_width = w;
    unit.shape = shape;
    unit.seed = seed;
    unit.sample_rate = sample_rate;

    const double support = effective_width * sample_rate;
    const auto envelope = smoothed_power_envelope(unit.response, static_cast<std::size_t>(std::max(1.0, support / 16.0)));
    unit.envelope_correlation = pearson_correlation(envelope, raised_cosine_target(length, support));
    return unit;
}

std::vector<double> group_delay(std::span<const double> phase, std::size_t dft_length) {
    const std::size_t m = phase.size();
    std::vector<double> out(m, 0.0);
    if (m < 2) return out;
    const double domega = 2.0 * kPi / static_cast<double>(dft_length);
    out[0] = -(phase[1] - phase[0]) / domega;
    out[m - 1] = -(phase[m - 1] - phase[m - 2]) / domega;
    for (std::size_t k = 1; k + 1 < m; ++k) out[k] = -(phase[k + 1] - phase[k - 1]) / (2.0 * domega);
    return out;
}

std::vector<double> build_base_unit(const std::array<std::span<const double>, 3>& units, std::size_t period) {
    if (period < 4 || period % 4 != 0) throw Error(ErrorKind::InvalidPeriod, "period must be a positive multiple of 4");
    std::size_t longest = 0;
    for (const auto& g : units) {
        if (g.empty()) throw Error(ErrorKind::InvalidInput, "unit must not be empty");
        if (2 * g.size() > 3 * period) throw Error(ErrorKind::InvalidInput, "unit longer than 6 N / 4");
        longest = std::max(longest, g.size());
    }
    const std::size_t slot = period / 4;
    std::vector<double> u(3 * slot + longest, 0.0);
    for (std::size_t q = 0; q < 3; ++q) {
        for (std::size_t r = 0; r < 4; ++r) {
            const double gain = kUnitGain[q] * kHadamard4[q][r];
            const std::size_t offset = r * slot;
            for (std::size_t n = 0; n < units[q].size(); ++n) u[offset + n] += gain * units[q][n];
        }
    }
    return u;
}

std::vector<double> build_periodic_period(const std::array<std::span<const double>, 3>& units, std::size_t period,
                                          std::size_t repetitions) {
    if (repetitions < 8 || repetitions % 2 != 0)
        throw Error(ErrorKind::InvalidRepetition, "repetitions must be an even number >= 8");
    const auto u = build_base_unit(units, period);
    // s_tmp[n] = sum_p u[n - (p-1) N]; excerpt n in [(P/2 - 1) N, P/2 N).
    const std::size_t start = (repetitions / 2 - 1) * period;
    std::vector<double> out(period, 0.0);
    for (std::size_t p = 0; p < repetitions; ++p) {
        const std::size_t offset = p * period;
        for (std::size_t n = 0; n < period; ++n) {
            const std::size_t t = start + n;
            if (t >= offset && t - offset < u.size()) out[n] += u[t - offset];
        }
    }
    return out;
}

double default_effective_width(std::size_t period, int sample_rate) noexcept {
    return 0.4 * static_cast<double>(period) / static_cast<double>(sample_rate);
}

StructuredTestSignal build_periodic_test_signal(const std::array<std::uint64_t, 3>& seeds, std::size_t period,
                                                std::size_t repetitions, int sample_rate, TransitionShape shape,
                                                double effective_width) {
    if (period < 16 || period % 4 != 0) throw Error(ErrorKind::InvalidPeriod, "period must be a multiple of 4 and >= 16");
    if (!is_pow2(period)) throw Error(ErrorKind::InvalidPeriod, "CAPRICEP test signals need a power-of-two period");
    if (repetitions < 8 || repetitions % 2 != 0)
        throw Error(ErrorKind::InvalidRepetition, "repetitions must be an even number >= 8");
    if (effective_width <= 0.0) effective_width = default_effective_width(period, sample_rate);

    std::array<UnitCapricep, 3> units;
    for (std::size_t q = 0; q < 3; ++q) units[q] = gen_unit_capricep(seeds[q], effective_width, sample_rate, period, shape);
    const std::array<std::span<const double>, 3> views{units[0].response, units[1].response, units[2].response};

    StructuredTestSignal s{PeriodicSignal(build_periodic_period(views, period, repetitions), sample_rate)};
    s.unit_seeds = seeds;
    s.shape = shape;
    s.effective_width = effective_width;
    s.repetitions_built = repetitions;
    s.transition_count = units[0].transition_count;
    return s;
}

StructuredTestSignal negated(const StructuredTestSignal& s) {
    std::vector<double> flipped(s.period.period().begin(), s.period.period().end());
    for (double& v : flipped) v = -v;
    StructuredTestSignal out = s;
    out.period = PeriodicSignal(std::move(flipped), s.period.sample_rate());
    out.negated = !s.negated;
    return out;
}

std::string describe(const SpectralTarget& target) {
    switch (target.kind) {
        case SpectralTarget::Kind::Flat: return "flat";
        case SpectralTarget::Kind::Pink: return "pink";
        case SpectralTarget::Kind::Custom: return "custom";
    }
    return "flat";
}

std::vector<double> target_magnitude(const SpectralTarget& target, std::size_t period) {
    const std::size_t bins = period / 2 + 1;
    std::vector<double> mag(bins, 0.0);
    switch (target.kind) {
        case SpectralTarget::Kind::Flat:
            std::fill(mag.begin() + 1, mag.end(), 1.0);
            break;
        case SpectralTarget::Kind::Pink:
            for (std::size_t k = 1; k < bins; ++k) mag[k] = 1.0 / std::sqrt(static_cast<double>(k));
            break;
        case SpectralTarget::Kind::Custom:
            if (target.magnitude.size() != bins)
                throw Error(ErrorKind::InvalidTarget, "custom target needs N/2 + 1 magnitudes");
            for (std::size_t k = 1; k < bins; ++k) {
                if (!(target.magnitude[k] > 0.0) || !std::isfinite(target.magnitude[k]))
                    throw Error(ErrorKind::InvalidTarget, "target magnitude must be positive at bin " + std::to_string(k));
                mag[k] = target.magnitude[k];
            }
            break;
    }
    return mag;
}

PeriodicSignal shape_spectrum(const PeriodicSignal& p, const SpectralTarget& target) {
    const std::size_t n = p.size();
    if (n < 2) throw Error(ErrorKind::InvalidLength, "period too short to shape");
    const auto mag = target_magnitude(target, n);
    auto half = fft::forward_real(p.period());
    half[0] = 0.0;
    for (std::size_t k = 1; k < half.size(); ++k) {
        const double a = std::abs(half[k]);
        const std::complex<double> dir = a > 0.0 ? half[k] / a : std::complex<double>(1.0, 0.0);
        half[k] = mag[k] * dir;
    }
    if (n % 2 == 0) half[n / 2] = std::complex<double>(half[n / 2].real() >= 0.0 ? mag[n / 2] : -mag[n / 2], 0.0);
    auto shaped = fft::inverse_real(half, n);
    double peak = 0.0;
    for (double v : shaped) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : shaped) v *= 0.9 / peak;
    return PeriodicSignal(std::move(shaped), p.sample_rate());
}

PeriodicSignal gen_swept_sine(std::size_t period, int sample_rate) {
    if (period < 16) throw Error(ErrorKind::InvalidLength, "swept sine needs at least 16 samples");
    const double n = static_cast<double>(period);
    std::vector<std::complex<double>> half(period / 2 + 1);
    for (std::size_t k = 0; k < half.size(); ++k) {
        const double kd = static_cast<double>(k);
        // Group delay N/4 + k samples, i.e. phase -(pi/2) k - pi k^2 / N.
        const double phase = -0.5 * kPi * kd - kPi * kd * kd / n;
        half[k] = std::polar(1.0, phase);
    }
    if (period % 2 == 0) half[period / 2] = std::cos(std::arg(half[period / 2])) >= 0.0 ? 1.0 : -1.0;
    return PeriodicSignal(fft::inverse_real(half, period), sample_rate);
}

}  // namespace capmeas
