#include "commands.hpp"

#include <capmeas/capricep.hpp>
#include <capmeas/errors.hpp>
#include <capmeas/fft.hpp>
#include <capmeas/report.hpp>
#include <capmeas/simulator.hpp>
#include <capmeas/windowing.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace capmeas::cli {

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, path + ": " + e.what());
    }
}

std::vector<double> scaled_to_peak(std::span<const double> x, double peak_target, double& scale) {
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    scale = peak > 0.0 ? peak_target / peak : 1.0;
    std::vector<double> out(x.begin(), x.end());
    for (double& v : out) v *= scale;
    return out;
}

// Whitespace- or comma-separated magnitudes, one per bin 0..N/2.
std::vector<double> read_magnitudes(const std::string& path) {
    std::string text = read_text(path);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw Error(ErrorKind::InvalidTarget, "non-numeric entry in " + path);
    return out;
}

SpectralTarget parse_spectrum(const std::string& spec) {
    if (spec == "flat") return SpectralTarget::flat();
    if (spec == "pink") return SpectralTarget::pink();
    if (spec.rfind("file:", 0) == 0) return SpectralTarget::custom(read_magnitudes(spec.substr(5)));
    throw Error(ErrorKind::InvalidInput, "spectrum must be flat, pink or file:PATH");
}

GenerateOptions apply_sidecar(GenerateOptions o) {
    const json j = read_json(o.from_sidecar);
    try {
        o.signal = j.at("kind").get<std::string>();
        o.sample_rate = j.at("sample_rate").get<int>();
        o.period = j.at("N").get<std::size_t>();
        o.repetitions = j.at("P").get<std::size_t>();
        o.spectrum = j.value("spectrum", std::string("flat"));
        o.negate = j.value("negated", false);
        o.wav_format = j.value("wav_format", std::string("float32"));
        if (o.signal == "capricep") {
            o.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
            o.shape = j.at("shape").get<std::string>();
            o.effective_width = j.at("effective_width").get<double>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, o.from_sidecar + ": " + e.what());
    }
    return o;
}

struct TestSignal {
    PeriodicSignal period;
    json sidecar;
    std::string kind;
};

TestSignal load_test_signal(const std::string& wav_path) {
    json side = read_json(sidecar_path(wav_path));
    const auto wav = read_wav(wav_path);
    std::size_t n = 0;
    int rate = 0;
    std::string kind;
    try {
        n = side.at("N").get<std::size_t>();
        rate = side.at("sample_rate").get<int>();
        kind = side.at("kind").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, sidecar_path(wav_path) + ": " + e.what());
    }
    if (wav.sample_rate != rate) throw Error(ErrorKind::InvalidInput, wav_path + ": sample rate differs from its sidecar");
    if (n == 0 || wav.samples.size() < n) throw Error(ErrorKind::InvalidInput, wav_path + ": shorter than one period");
    std::vector<double> period(wav.samples.begin(), wav.samples.begin() + static_cast<std::ptrdiff_t>(n));
    return {PeriodicSignal(std::move(period), rate), std::move(side), std::move(kind)};
}

Signal load_acquired(const std::string& path, int expected_rate) {
    auto wav = read_wav(path);
    if (wav.sample_rate != expected_rate)
        throw Error(ErrorKind::InvalidInput, path + ": sample rate " + std::to_string(wav.sample_rate) +
                                                 " does not match the test signal (" + std::to_string(expected_rate) + ")");
    return Signal(std::move(wav.samples), wav.sample_rate);
}

void write_report_files(const MeasurementReport& report, const fs::path& dir, const std::string& format) {
    fs::create_directories(dir);
    write_text(dir / "report.json", to_json(report));
    if (format == "csv") write_text(dir / "report.csv", to_csv(report));
    write_text(dir / "spectrum.svg", render_spectrum_svg(report));
    write_text(dir / "ir_power.svg", render_ir_svg(report));
}

void require_format(const std::string& format) {
    if (format != "json" && format != "csv") throw Error(ErrorKind::InvalidInput, "format must be json or csv");
}

}  // namespace

std::string sidecar_path(const std::string& wav_path) {
    fs::path p(wav_path);
    p.replace_extension(".json");
    return p.string();
}

int run_generate(const GenerateOptions& opts) {
    const GenerateOptions o = opts.from_sidecar.empty() ? opts : apply_sidecar(opts);
    const WavFormat format = parse_wav_format(o.wav_format);
    const SpectralTarget target = parse_spectrum(o.spectrum);
    if (o.sample_rate <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");

    json side;
    std::vector<double> period;
    if (o.signal == "capricep") {
        if (o.seeds.size() != 3) throw Error(ErrorKind::InvalidInput, "--seed needs exactly three values");
        if (o.repetitions < 8 || o.repetitions % 2 != 0)
            throw Error(ErrorKind::InvalidRepetition, "repetitions must be an even number >= 8");
        const auto shape = parse_transition_shape(o.shape);
        const auto s = build_periodic_test_signal({o.seeds[0], o.seeds[1], o.seeds[2]}, o.period, o.repetitions,
                                                  o.sample_rate, shape, o.effective_width);
        period.assign(s.period.period().begin(), s.period.period().end());
        side["kind"] = "capricep";
        side["seeds"] = o.seeds;
        side["shape"] = std::string(to_string(shape));
        side["effective_width"] = s.effective_width;
        side["transition_count"] = s.transition_count;
    } else if (o.signal == "swept-sine") {
        if (o.repetitions < 2) throw Error(ErrorKind::InvalidRepetition, "repetitions must be >= 2");
        const auto s = gen_swept_sine(o.period, o.sample_rate);
        period.assign(s.period().begin(), s.period().end());
        side["kind"] = "swept-sine";
    } else {
        throw Error(ErrorKind::InvalidInput, "signal must be capricep or swept-sine");
    }

    // A flat target is already met by construction; only rescale so DC survives.
    double scale = 1.0;
    if (target.kind == SpectralTarget::Kind::Flat) {
        period = scaled_to_peak(period, 0.9, scale);
    } else {
        const auto shaped = shape_spectrum(PeriodicSignal(std::move(period), o.sample_rate), target);
        period.assign(shaped.period().begin(), shaped.period().end());
    }
    if (o.negate)
        for (double& v : period) v = -v;

    const PeriodicSignal p(std::move(period), o.sample_rate);
    const auto samples = p.repeated(o.repetitions + 1);
    write_wav(o.output, samples, o.sample_rate, format);

    side["sample_rate"] = o.sample_rate;
    side["N"] = o.period;
    side["P"] = o.repetitions;
    side["warmup_periods"] = 1;
    side["spectrum"] = o.spectrum;
    side["scale"] = scale;
    side["negated"] = o.negate;
    side["wav_format"] = std::string(to_string(format));
    write_text(sidecar_path(o.output), side.dump(2) + "\n");
    std::cout << "wrote " << o.output << " (" << samples.size() << " samples, " << o.repetitions + 1 << " periods of "
              << o.period << ")\n";
    return 0;
}

int run_safeguard(const SafeguardOptions& o) {
    o.config.validate();
    const WavFormat format = parse_wav_format(o.wav_format);
    if (o.repetitions < 2) throw Error(ErrorKind::InvalidRepetition, "repetitions must be >= 2");
    const auto in = read_wav(o.input);
    if (in.samples.empty()) throw Error(ErrorKind::InvalidInput, o.input + ": no samples");
    const std::size_t n = o.period ? o.period : std::max<std::size_t>(std::size_t{1} << 17, next_pow2(in.samples.size()));
    if (in.samples.size() > n) throw Error(ErrorKind::InvalidLength, "input is longer than the period");

    std::optional<std::vector<double>> noise_power;
    if (!o.noise.empty()) {
        const auto noise = read_wav(o.noise);
        if (noise.sample_rate != in.sample_rate) throw Error(ErrorKind::InvalidInput, "noise recording sample rate differs");
        // Averaged periodogram on the N-point grid.
        std::vector<double> acc(n / 2 + 1, 0.0);
        std::size_t frames = 0;
        for (std::size_t at = 0; at < noise.samples.size(); at += n, ++frames) {
            std::vector<double> frame(n, 0.0);
            const std::size_t len = std::min(n, noise.samples.size() - at);
            std::copy_n(noise.samples.begin() + static_cast<std::ptrdiff_t>(at), len, frame.begin());
            const auto X = fft::forward_real(frame);
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(X[k]);
        }
        for (double& v : acc) v /= static_cast<double>(frames);
        noise_power = std::move(acc);
    }
    const auto sg = noise_power ? make_safeguarded_signal(in.samples, n, in.sample_rate, o.config, std::span<const double>(*noise_power))
                                : make_safeguarded_signal(in.samples, n, in.sample_rate, o.config);

    double peak = 0.0;
    for (double v : sg.period.period()) peak = std::max(peak, std::abs(v));
    double scale = 1.0;
    std::vector<double> period(sg.period.period().begin(), sg.period.period().end());
    if (peak > 1.0) period = scaled_to_peak(period, 0.9, scale);
    const PeriodicSignal p(std::move(period), in.sample_rate);
    write_wav(o.output, p.repeated(o.repetitions + 1), in.sample_rate, format);

    json side;
    side["kind"] = "safeguarded";
    side["source"] = o.input;
    side["sample_rate"] = in.sample_rate;
    side["N"] = n;
    side["P"] = o.repetitions;
    side["warmup_periods"] = 1;
    side["scale"] = scale;
    side["safeguard"] = {{"relative_threshold_db", o.config.relative_threshold_db},
                         {"absolute_floor_db", o.config.absolute_floor_db},
                         {"low_freq_limit_hz", o.config.low_freq_limit_hz},
                         {"smoothing_width", o.config.smoothing_width}};
    if (!o.noise.empty()) side["noise"] = o.noise;
    side["wav_format"] = std::string(to_string(format));
    write_text(sidecar_path(o.output), side.dump(2) + "\n");

    const auto Xs = fft::forward_real(sg.period.period());
    std::string csv = "bin,frequency_hz,magnitude_db,threshold_db,safeguarded_db\n";
    char line[160];
    for (std::size_t k = 0; k < sg.threshold.size(); ++k) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", k,
                      static_cast<double>(k) * in.sample_rate / static_cast<double>(n), magnitude_to_db(sg.original_magnitude[k]),
                      magnitude_to_db(sg.threshold[k]), magnitude_to_db(std::abs(Xs[k])));
        csv += line;
    }
    fs::path csv_path(o.output);
    csv_path.replace_extension(".threshold.csv");
    write_text(csv_path, csv);
    std::cout << "wrote " << o.output << " (period " << n << ", threshold " << csv_path.string() << ")\n";
    return 0;
}

int run_simulate(const SimulateOptions& o) {
    const SimTarget target = sim_target_from_json(read_text(o.target));
    const auto in = read_wav(o.input);
    const WavFormat format = o.wav_format.empty() ? in.format : parse_wav_format(o.wav_format);
    const Signal out = apply_target(target, Signal(in.samples, in.sample_rate));
    write_wav(o.output, out.samples(), out.sample_rate(), format);

    json side;
    side["kind"] = "acquired";
    side["input"] = o.input;
    side["sample_rate"] = out.sample_rate();
    side["seed"] = target.seed;
    side["target"] = json::parse(to_json(target));
    side["wav_format"] = std::string(to_string(format));
    write_text(sidecar_path(o.output), side.dump(2) + "\n");
    std::cout << "wrote " << o.output << " (" << out.size() << " samples)\n";
    return 0;
}

int run_measure(const MeasureOptions& o) {
    require_format(o.format);
    if (o.tests.empty() || o.tests.size() != o.acquired.size())
        throw Error(ErrorKind::InvalidInput, "give one --acquired for every --test");
    if (o.negated_test.empty() != o.negated_acquired.empty())
        throw Error(ErrorKind::InvalidInput, "--negated-test and --negated-acquired go together");

    std::vector<TestSignal> tests;
    std::vector<Signal> acquired;
    for (std::size_t i = 0; i < o.tests.size(); ++i) {
        tests.push_back(load_test_signal(o.tests[i]));
        acquired.push_back(load_acquired(o.acquired[i], tests.back().period.sample_rate()));
        if (tests[i].period.size() != tests[0].period.size())
            throw Error(ErrorKind::InvalidInput, "all test signals must share the period length");
    }
    const std::size_t n = tests[0].period.size();
    const std::size_t bins = n / 2 + 1;

    json config;
    config["discard_head"] = o.discard_head;
    config["tests"] = o.tests;
    config["acquired"] = o.acquired;
    config["test_signals"] = json::array();
    for (const auto& t : tests) config["test_signals"].push_back(t.sidecar);

    MeasurementReport report;
    if (tests.size() == 1 && tests[0].kind == "capricep") {
        if (n % 4 != 0) throw Error(ErrorKind::InvalidPeriod, "period must be a multiple of 4");
        auto r = estimate_simultaneous(tests[0].period, acquired[0], o.discard_head);
        report = make_report("simultaneous", r.long_response.H, r.repetitions.periods_used, r.repetitions.rtv_level,
                             r.sdti.sdti_level, r.long_response.impulse_response);
        for (auto& h : r.short_responses) report.short_ir.push_back(std::move(h));
        report.sdti_ir = std::move(r.sdti.sdti_ir);
    } else if (tests.size() == 1) {
        auto r = estimate_with_repetitions(tests[0].period, acquired[0], o.discard_head);
        report = make_report("periodic", r.mean_H, r.periods_used, r.rtv_level, {}, std::move(r.mean_ir));
    } else {
        std::vector<std::vector<double>> irs;
        std::vector<Complex> mean_H(n, 0.0);
        std::vector<double> rtv(bins, 0.0);
        std::size_t periods = 0;
        for (std::size_t i = 0; i < tests.size(); ++i) {
            auto r = estimate_with_repetitions(tests[i].period, acquired[i], o.discard_head);
            for (std::size_t k = 0; k < n; ++k) mean_H[k] += r.mean_H[k] / static_cast<double>(tests.size());
            for (std::size_t k = 0; k < bins; ++k) rtv[k] += r.rtv_level[k] / static_cast<double>(tests.size());
            periods += r.periods_used;
            irs.push_back(std::move(r.mean_ir));
        }
        auto sd = serial_sdti(irs);
        report = make_report("serial", Spectrum(std::move(mean_H), tests[0].period.sample_rate()), periods, rtv,
                             sd.sdti_level, std::move(sd.mean_ir));
        report.sdti_ir = std::move(sd.sdti_ir);
    }

    if (!o.negated_test.empty()) {
        const auto neg = load_test_signal(o.negated_test);
        if (neg.period.size() != n) throw Error(ErrorKind::InvalidInput, "negated test signal period differs");
        const auto neg_acq = load_acquired(o.negated_acquired, neg.period.sample_rate());
        const auto r = estimate_with_repetitions(neg.period, neg_acq, o.discard_head);
        report.even_ir = even_component(report.ir, r.mean_ir);
        config["negated_test"] = o.negated_test;
        config["negated_acquired"] = o.negated_acquired;
    }
    report.config_json = config.dump();
    write_report_files(report, o.output_dir, o.format);
    std::cout << "method " << report.method << ", " << report.P << " periods, report in " << o.output_dir << "\n";
    return 0;
}

int run_optimize_window(const OptimizeWindowOptions& o) {
    require_format(o.format);
    if (o.period == 0) throw Error(ErrorKind::InvalidLength, "period must be positive");
    const auto series = optimize_weighting_series(o.terms, o.period, o.span);
    std::string text;
    if (o.format == "json") {
        json j;
        j["period"] = o.period;
        j["span"] = o.span;
        j["results"] = json::array();
        for (const auto& r : series)
            j["results"].push_back({{"k", r.coeffs.size()}, {"coeffs", r.coeffs}, {"sidelobe_db", r.sidelobe_db},
                                    {"converged", r.converged}, {"evaluations", r.evaluations}});
        text = j.dump(2) + "\n";
    } else {
        char buf[64];
        for (const auto& r : series) {
            text += std::to_string(r.coeffs.size());
            for (double c : r.coeffs) {
                std::snprintf(buf, sizeof buf, ",%.17g", c);
                text += buf;
            }
            std::snprintf(buf, sizeof buf, ",%.17g\n", r.sidelobe_db);
            text += buf;
        }
    }
    if (o.output.empty())
        std::cout << text;
    else
        write_text(o.output, text);
    return 0;
}

int run_report(const ReportOptions& o) {
    require_format(o.format);
    const auto report = report_from_json(read_text(o.input));
    const fs::path dir(o.output_dir);
    fs::create_directories(dir);
    if (o.format == "csv") write_text(dir / "report.csv", to_csv(report));
    write_text(dir / "spectrum.svg", render_spectrum_svg(report));
    write_text(dir / "ir_power.svg", render_ir_svg(report));
    return 0;
}

}  // namespace capmeas::cli
