#include "capmeas/simulator.hpp"

#include "capmeas/errors.hpp"
#include "capmeas/fft.hpp"
#include "capmeas/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace capmeas {

void SimTarget::validate() const {
    if (ir.empty()) throw Error(ErrorKind::InvalidInput, "target response must have at least one tap");
    for (double v : ir)
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "target response has non-finite taps");
    if (!std::isfinite(eps2) || !std::isfinite(eps3)) throw Error(ErrorKind::InvalidInput, "non-finite nonlinearity");
    if (!(noise.level >= 0.0) || !std::isfinite(noise.level)) throw Error(ErrorKind::InvalidInput, "noise level must be >= 0");
    if (!(std::abs(drift.depth) < 1.0)) throw Error(ErrorKind::InvalidInput, "drift depth must satisfy |depth| < 1");
    if (!std::isfinite(drift.rate_hz)) throw Error(ErrorKind::InvalidInput, "non-finite drift rate");
}

std::vector<double> synth_impulse_response(std::uint64_t seed, double decay_time, int sample_rate, std::size_t length) {
    if (length == 0) throw Error(ErrorKind::InvalidLength, "response length must be >= 1");
    if (!(decay_time > 0.0)) throw Error(ErrorKind::InvalidInput, "decay time must be positive");
    if (sample_rate <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
    if (length == 1) return {1.0};
    SplitMix64 rng(seed);
    std::vector<double> h(length);
    for (std::size_t n = 0; n < length; ++n) {
        const double t = static_cast<double>(n) / sample_rate;
        h[n] = rng.normal() * std::exp(-6.91 * t / decay_time);
    }
    double peak = 0.0;
    for (double v : h) peak = std::max(peak, std::abs(v));
    for (double& v : h) v /= peak;
    return h;
}

std::vector<double> make_noise(NoiseSpec spec, std::size_t length, std::uint64_t seed) {
    std::vector<double> out(length, 0.0);
    if (spec.level == 0.0 || length == 0) return out;
    SplitMix64 rng(seed);
    if (spec.kind == NoiseSpec::Kind::White) {
        for (double& v : out) v = rng.normal();
    } else {
        // -3 dB/octave: scale white noise bins by 1/sqrt(k), DC removed.
        const std::size_t n = next_pow2(length);
        std::vector<double> white(n);
        for (double& v : white) v = rng.normal();
        auto spec_bins = fft::forward_real(white);
        spec_bins[0] = 0.0;
        for (std::size_t k = 1; k < spec_bins.size(); ++k) spec_bins[k] /= std::sqrt(static_cast<double>(k));
        auto pink = fft::inverse_real(spec_bins, n);
        std::copy(pink.begin(), pink.begin() + static_cast<std::ptrdiff_t>(length), out.begin());
    }
    double ms = 0.0;
    for (double v : out) ms += v * v;
    ms /= static_cast<double>(length);
    const double scale = ms > 0.0 ? spec.level / std::sqrt(ms) : 0.0;
    for (double& v : out) v *= scale;
    return out;
}

namespace {

std::vector<double> convolve(std::span<const double> x, std::span<const double> h) {
    const std::size_t len = x.size() + h.size() - 1;
    if (h.size() == 1) {
        std::vector<double> out(x.begin(), x.end());
        for (double& v : out) v *= h[0];
        return out;
    }
    if (std::min(x.size(), h.size()) <= 32) {
        std::vector<double> out(len, 0.0);
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < h.size(); ++j) out[i + j] += x[i] * h[j];
        return out;
    }
    const std::size_t n = next_pow2(len);
    std::vector<double> a(n, 0.0), b(n, 0.0);
    std::copy(x.begin(), x.end(), a.begin());
    std::copy(h.begin(), h.end(), b.begin());
    auto A = fft::forward_real(a);
    const auto B = fft::forward_real(b);
    for (std::size_t k = 0; k < A.size(); ++k) A[k] *= B[k];
    auto out = fft::inverse_real(A, n);
    out.resize(len);
    return out;
}

}  // namespace

Signal apply_target(const SimTarget& target, const Signal& input) {
    target.validate();
    const auto x = input.samples();
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        w[i] = v + target.eps2 * v * v + target.eps3 * v * v * v;
    }
    auto z = convolve(w, target.ir);
    if (target.drift.depth != 0.0) {
        const double step = 2.0 * std::numbers::pi * target.drift.rate_hz / input.sample_rate();
        for (std::size_t n = 0; n < z.size(); ++n) z[n] *= 1.0 + target.drift.depth * std::sin(step * static_cast<double>(n));
    }
    if (target.noise.level > 0.0) {
        const auto noise = make_noise(target.noise, z.size(), derive_seed(target.seed, 1));
        for (std::size_t n = 0; n < z.size(); ++n) z[n] += noise[n];
    }
    for (double v : z)
        if (!std::isfinite(v)) throw Error(ErrorKind::SimulationOverflow, "simulated output is not finite");
    return Signal(std::move(z), input.sample_rate());
}

std::string to_json(const SimTarget& target) {
    nlohmann::json j;
    j["ir"] = target.ir;
    j["eps2"] = target.eps2;
    j["eps3"] = target.eps3;
    j["noise"] = {{"kind", target.noise.kind == NoiseSpec::Kind::Pink ? "pink" : "white"}, {"level", target.noise.level}};
    j["drift"] = {{"depth", target.drift.depth}, {"rate_hz", target.drift.rate_hz}};
    j["seed"] = target.seed;
    return j.dump(2);
}

SimTarget sim_target_from_json(std::string_view text) {
    SimTarget t;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "target config must be a JSON object");
        t.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("ir")) {
            t.ir = j.at("ir").get<std::vector<double>>();
        } else if (j.contains("ir_synth")) {
            const auto& s = j.at("ir_synth");
            t.ir = synth_impulse_response(s.value("seed", t.seed), s.at("decay_time").get<double>(),
                                          s.value("sample_rate", 44100), s.at("length").get<std::size_t>());
        }
        t.eps2 = j.value("eps2", 0.0);
        t.eps3 = j.value("eps3", 0.0);
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            const auto kind = n.value("kind", std::string("white"));
            if (kind == "white")
                t.noise.kind = NoiseSpec::Kind::White;
            else if (kind == "pink")
                t.noise.kind = NoiseSpec::Kind::Pink;
            else
                throw Error(ErrorKind::InvalidInput, "noise kind must be white or pink");
            t.noise.level = n.value("level", 0.0);
        }
        if (j.contains("drift")) {
            const auto& d = j.at("drift");
            t.drift.depth = d.value("depth", 0.0);
            t.drift.rate_hz = d.value("rate_hz", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("target config: ") + e.what());
    }
    t.validate();
    return t;
}

}  // namespace capmeas
