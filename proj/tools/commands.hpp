#pragma once

#include <capmeas/estimator.hpp>
#include <capmeas/wav.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace capmeas::cli {

struct GenerateOptions {
    std::string output;
    std::string from_sidecar;
    std::string signal = "capricep";  // capricep | swept-sine
    std::size_t period = 32768;
    std::size_t repetitions = 8;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::string shape = "erf";
    std::string spectrum = "flat";
    int sample_rate = 44100;
    double effective_width = 0.0;
    bool negate = false;
    std::string wav_format = "float32";
};

struct SafeguardOptions {
    std::string input;
    std::string output;
    std::string noise;
    std::size_t period = 0;  // 0: max(2^17, next power of two >= input)
    std::size_t repetitions = 8;
    SafeguardConfig config;
    std::string wav_format = "float32";
};

struct SimulateOptions {
    std::string target;
    std::string input;
    std::string output;
    std::string wav_format;  // empty: same as input
};

struct MeasureOptions {
    std::vector<std::string> tests;
    std::vector<std::string> acquired;
    std::string negated_test;
    std::string negated_acquired;
    std::size_t discard_head = 1;
    std::string format = "json";
    std::string output_dir;
};

struct OptimizeWindowOptions {
    std::size_t terms = 4;
    std::size_t period = 256;
    std::size_t span = 2;
    std::string format = "json";
    std::string output;  // empty: stdout
};

struct ReportOptions {
    std::string input;
    std::string output_dir;
    std::string format = "json";
};

int run_generate(const GenerateOptions& o);
int run_safeguard(const SafeguardOptions& o);
int run_simulate(const SimulateOptions& o);
int run_measure(const MeasureOptions& o);
int run_optimize_window(const OptimizeWindowOptions& o);
int run_report(const ReportOptions& o);

/// Path of the JSON sidecar belonging to a WAV file (extension replaced).
std::string sidecar_path(const std::string& wav_path);

}  // namespace capmeas::cli
