#include "commands.hpp"

#include <capmeas/errors.hpp>
#include <capmeas/parallel.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

bool is_validation(capmeas::ErrorKind kind) {
    using K = capmeas::ErrorKind;
    switch (kind) {
        case K::InvalidLength:
        case K::InvalidInput:
        case K::InvalidSpan:
        case K::InvalidPeriod:
        case K::InvalidRepetition:
        case K::InvalidTarget:
        case K::InvalidThreshold:
            return true;
        default:
            return false;
    }
}

void add_safeguard_flags(CLI::App* cmd, capmeas::SafeguardConfig& cfg) {
    cmd->add_option("--safeguard-rel-db", cfg.relative_threshold_db, "threshold below the smoothed magnitude (dB)")
        ->capture_default_str();
    cmd->add_option("--safeguard-floor-db", cfg.absolute_floor_db, "absolute floor below the spectral peak (dB)")
        ->capture_default_str();
    cmd->add_option("--safeguard-lf-hz", cfg.low_freq_limit_hz, "bins below this use the absolute floor (Hz)")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace capmeas::cli;

    CLI::App app{"capmeas: structured test signals and LTI/RTV/SDTI estimation"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads for estimation")->check(CLI::Range(1u, 256u))->capture_default_str();

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "write a periodic test signal (P + 1 periods) and its JSON sidecar");
    g->add_option("-o,--output", gen.output, "output WAV")->required();
    g->add_option("--from-sidecar", gen.from_sidecar, "reuse the parameters recorded in a sidecar");
    g->add_option("--signal", gen.signal, "capricep | swept-sine")->capture_default_str();
    g->add_option("--period", gen.period, "period N in samples")->capture_default_str();
    g->add_option("--repetitions", gen.repetitions, "repetitions P")->capture_default_str();
    g->add_option("--seed", gen.seeds, "three unit seeds S1,S2,S3")->delimiter(',')->expected(1, 3);
    g->add_option("--shape", gen.shape, "erf | sigmoid | iir")->capture_default_str();
    g->add_option("--spectrum", gen.spectrum, "flat | pink | file:PATH")->capture_default_str();
    g->add_option("--sample-rate", gen.sample_rate, "Hz")->capture_default_str();
    g->add_option("--effective-width", gen.effective_width, "unit effective width in seconds (default 0.4 N / fs)");
    g->add_flag("--negate", gen.negate, "write the sign-flipped signal");
    g->add_option("--wav-format", gen.wav_format, "pcm16 | float32 | float64")->capture_default_str();

    SafeguardOptions sg;
    auto* s = app.add_subcommand("safeguard", "turn an arbitrary sound into a periodic test signal");
    s->add_option("-i,--input", sg.input, "input WAV (mono)")->required();
    s->add_option("-o,--output", sg.output, "output WAV")->required();
    s->add_option("--noise", sg.noise, "background-noise recording for the noise floor");
    s->add_option("--period", sg.period, "period N (default: max(2^17, next power of two >= input))");
    s->add_option("--repetitions", sg.repetitions, "repetitions P")->capture_default_str();
    s->add_option("--wav-format", sg.wav_format, "pcm16 | float32 | float64")->capture_default_str();
    add_safeguard_flags(s, sg.config);

    SimulateOptions sim;
    auto* m = app.add_subcommand("simulate", "pass a WAV through a synthetic target");
    m->add_option("--target", sim.target, "target JSON")->required();
    m->add_option("-i,--input", sim.input, "input WAV")->required();
    m->add_option("-o,--output", sim.output, "output WAV")->required();
    m->add_option("--wav-format", sim.wav_format, "pcm16 | float32 | float64 (default: as input)");

    MeasureOptions meas;
    auto* me = app.add_subcommand("measure", "estimate gain, RTV and SDTI from recordings");
    me->add_option("--test", meas.tests, "test-signal WAV (with sidecar); repeat for serial SDTI")->required();
    me->add_option("--acquired", meas.acquired, "recording of the matching --test")->required();
    me->add_option("--negated-test", meas.negated_test, "negated test-signal WAV");
    me->add_option("--negated-acquired", meas.negated_acquired, "recording of the negated test signal");
    me->add_option("--discard-head", meas.discard_head, "leading periods to drop")->capture_default_str();
    me->add_option("--format", meas.format, "json | csv")->capture_default_str();
    me->add_option("-o,--output-dir", meas.output_dir, "directory for report and plots")->required();

    OptimizeWindowOptions win;
    auto* w = app.add_subcommand("optimize-window", "optimize cosine-series truncation weights");
    w->add_option("--terms", win.terms, "maximum number of cosine terms k (1..8)")->capture_default_str();
    w->add_option("--period", win.period, "period N")->capture_default_str();
    w->add_option("--span", win.span, "periods spanned by the weighting")->capture_default_str();
    w->add_option("--format", win.format, "json | csv")->capture_default_str();
    w->add_option("-o,--output", win.output, "output file (default stdout)");

    ReportOptions rep;
    auto* r = app.add_subcommand("report", "re-render plots (and CSV) from a report JSON");
    r->add_option("-i,--input", rep.input, "report.json")->required();
    r->add_option("-o,--output-dir", rep.output_dir, "output directory")->required();
    r->add_option("--format", rep.format, "json | csv")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    capmeas::set_thread_count(threads);
    try {
        if (*g) return run_generate(gen);
        if (*s) return run_safeguard(sg);
        if (*m) return run_simulate(sim);
        if (*me) return run_measure(meas);
        if (*w) return run_optimize_window(win);
        if (*r) return run_report(rep);
    } catch (const capmeas::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_validation(e.kind()) ? kExitValidation : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitValidation;
}
