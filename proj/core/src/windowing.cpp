#include "capmeas/windowing.hpp"

#include "capmeas/errors.hpp"
#include "capmeas/fft.hpp"
#include "capmeas/rng.hpp"
#include "capmeas/signal_core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

namespace capmeas {

std::vector<double> cosine_series_window(std::span<const double> coeffs, std::size_t width) {
    if (coeffs.empty()) throw Error(ErrorKind::InvalidInput, "cosine series needs at least one coefficient");
    if (!(coeffs[0] > 0.0)) throw Error(ErrorKind::InvalidInput, "leading cosine coefficient must be positive");
    if (width == 0) throw Error(ErrorKind::InvalidLength, "window width must be positive");
    std::vector<double> w(width, 0.0);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(width);
    for (std::size_t n = 0; n < width; ++n) {
        double acc = 0.0;
        for (std::size_t m = 0; m < coeffs.size(); ++m)
            acc += coeffs[m] * std::cos(step * static_cast<double>(m * n % width));
        w[n] = acc;
    }
    return w;
}

WeightingFunction periodic_weighting(std::span<const double> coeffs, std::size_t period_len, std::size_t span) {
    if (span < 2) throw Error(ErrorKind::InvalidSpan, "weighting must span at least two periods");
    if (period_len == 0) throw Error(ErrorKind::InvalidLength, "period length must be positive");
    const std::size_t proto_width = (span - 1) * period_len;
    auto proto = cosine_series_window(coeffs, proto_width);
    const double total = std::accumulate(proto.begin(), proto.end(), 0.0);
    if (!(std::abs(total) > 0.0)) throw Error(ErrorKind::InvalidInput, "prototype sums to zero");

    // Running sum of the prototype over a length-N rectangle.
    const std::size_t len = span * period_len;
    std::vector<double> samples(len, 0.0);
    std::vector<double> prefix(proto_width + 1, 0.0);
    for (std::size_t i = 0; i < proto_width; ++i) prefix[i + 1] = prefix[i] + proto[i] / total;
    for (std::size_t n = 0; n + 1 < len; ++n) {
        const std::size_t hi = std::min(n, proto_width - 1);
        const std::size_t lo = n >= period_len - 1 ? n - (period_len - 1) : 0;
        if (lo <= hi) samples[n] = prefix[hi + 1] - prefix[lo];
    }

    WeightingFunction w;
    w.coeffs.assign(coeffs.begin(), coeffs.end());
    w.period_len = period_len;
    w.span = span;
    w.samples = std::move(samples);
    return w;
}

std::vector<double> fold_to_period(std::span<const double> segment, const WeightingFunction& w) {
    if (segment.size() != w.samples.size())
        throw Error(ErrorKind::InvalidInput, "segment length must equal the weighting length");
    const std::size_t n_period = w.period_len;
    std::vector<double> out(n_period, 0.0);
    for (std::size_t p = 0; p < w.span; ++p) {
        for (std::size_t n = 0; n < n_period; ++n) {
            const std::size_t i = n + p * n_period;
            out[n] += segment[i] * w.samples[i];
        }
    }
    return out;
}

double max_sidelobe_db(std::span<const double> window) {
    if (window.empty()) throw Error(ErrorKind::InvalidInput, "empty window");
    constexpr std::size_t kPadFactor = 16;
    const std::size_t len = next_pow2(window.size() * kPadFactor);
    std::vector<double> padded(len, 0.0);
    std::copy(window.begin(), window.end(), padded.begin());
    const auto half = fft::forward_real(padded);
    std::vector<double> mag(half.size());
    for (std::size_t k = 0; k < half.size(); ++k) mag[k] = std::abs(half[k]);

    const double peak = *std::max_element(mag.begin(), mag.end());
    if (!(peak > 0.0)) return kDbFloor;
    std::size_t edge = 0;
    while (edge + 1 < mag.size() && mag[edge + 1] < mag[edge]) ++edge;
    double side = 0.0;
    for (std::size_t k = edge + 1; k < mag.size(); ++k) side = std::max(side, mag[k]);
    return magnitude_to_db(side / peak);
}

double max_sidelobe_db(const WeightingFunction& w) { return max_sidelobe_db(w.samples); }

namespace {

struct SimplexResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t evaluations = 0;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, std::size_t budget) {
    const std::size_t d = start.size();
    SimplexResult result;
    std::vector<std::vector<double>> pts(d + 1, start);
    for (std::size_t i = 0; i < d; ++i) pts[i + 1][i] += 0.1 * std::max(1.0, std::abs(start[i]));
    std::vector<double> vals(d + 1);
    for (std::size_t i = 0; i <= d; ++i) vals[i] = objective(pts[i]);
    result.evaluations = d + 1;

    std::vector<std::size_t> order(d + 1);
    while (result.evaluations < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[d - 1];

        double spread = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j) spread = std::max(spread, std::abs(pts[i][j] - pts[best][j]));
        if (vals[worst] - vals[best] < 1e-10 && spread < 1e-9) {
            result.converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < d; ++j) centroid[j] += pts[i][j] / static_cast<double>(d);
        }
        auto along = [&](double t) {
            std::vector<double> p(d);
            for (std::size_t j = 0; j < d; ++j) p[j] = centroid[j] + t * (pts[worst][j] - centroid[j]);
            return p;
        };

        auto reflected = along(-1.0);
        const double fr = objective(reflected);
        ++result.evaluations;
        if (fr < vals[best]) {
            auto expanded = along(-2.0);
            const double fe = objective(expanded);
            ++result.evaluations;
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = std::move(reflected);
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        auto contracted = along(outside ? -0.5 : 0.5);
        const double fc = objective(contracted);
        ++result.evaluations;
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = std::move(contracted);
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= d; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < d; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            vals[i] = objective(pts[i]);
            ++result.evaluations;
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    result.f = *it;
    result.x = pts[static_cast<std::size_t>(it - vals.begin())];
    return result;
}

constexpr std::size_t kStarts = 8;
constexpr std::size_t kBudgetPerStart = 2000;
constexpr std::uint64_t kStartSeed = 0x5eed0f5105ull;

OptimizedWeighting optimize_next(const OptimizedWeighting& previous, std::size_t k, std::size_t period_len,
                                 std::size_t span) {
    auto objective = [&](const std::vector<double>& ratios) {
        std::vector<double> c(1, 1.0);
        c.insert(c.end(), ratios.begin(), ratios.end());
        return max_sidelobe_db(periodic_weighting(c, period_len, span));
    };

    std::vector<double> warm(previous.coeffs.begin() + 1, previous.coeffs.end());
    warm.push_back(0.0);

    OptimizedWeighting best = previous;
    best.coeffs.push_back(0.0);
    best.converged = false;
    best.evaluations = 0;
    SplitMix64 rng(kStartSeed + k);
    for (std::size_t s = 0; s < kStarts; ++s) {
        auto start = warm;
        if (s > 0) {
            // Perturb the warm start; the new term is seeded with an
            // alternating-sign guess as in the classical cosine families.
            for (double& v : start) v += 0.3 * (2.0 * rng.uniform() - 1.0) * std::max(0.1, std::abs(v));
            start.back() = (k % 2 == 0 ? -1.0 : 1.0) * 0.1 * rng.uniform();
        }
        auto run = nelder_mead(objective, start, kBudgetPerStart);
        best.evaluations += run.evaluations;
        if (run.f < best.sidelobe_db) {
            best.sidelobe_db = run.f;
            best.coeffs.assign(1, 1.0);
            best.coeffs.insert(best.coeffs.end(), run.x.begin(), run.x.end());
            best.converged = run.converged;
        } else if (s == 0) {
            best.converged = run.converged;
        }
    }
    return best;
}

}  // namespace

std::vector<OptimizedWeighting> optimize_weighting_series(std::size_t k_max, std::size_t period_len,
                                                          std::size_t span) {
    if (k_max < 1 || k_max > 8) throw Error(ErrorKind::InvalidInput, "number of cosine terms must be in [1, 8]");
    if (span < 2) throw Error(ErrorKind::InvalidSpan, "weighting must span at least two periods");
    std::vector<OptimizedWeighting> out;
    OptimizedWeighting first;
    first.coeffs = {1.0};
    first.sidelobe_db = max_sidelobe_db(periodic_weighting(first.coeffs, period_len, span));
    first.converged = true;
    first.evaluations = 1;
    out.push_back(first);
    for (std::size_t k = 2; k <= k_max; ++k) out.push_back(optimize_next(out.back(), k, period_len, span));
    return out;
}

OptimizedWeighting optimize_weighting(std::size_t k, std::size_t period_len, std::size_t span) {
    return optimize_weighting_series(k, period_len, span).back();
}

}  // namespace capmeas
