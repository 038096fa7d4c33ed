#pragma once

// Measurement report: per-bin levels in dB on the one-sided N-point grid, the
// long impulse response, and its short-time power. Serialized as JSON and CSV.

#include "capmeas/signal_core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace capmeas {

struct MeasurementReport {
    int sample_rate = 0;
    std::size_t N = 0;
    std::size_t P = 0;  ///< periods averaged
    std::string method;
    std::vector<double> frequency_hz;
    std::vector<double> gain_db;
    std::vector<double> rtv_db;
    std::vector<double> sdti_db;  ///< empty when the method gives no SDTI
    std::vector<double> ir;
    std::vector<double> ir_power_db;
    std::vector<std::vector<double>> short_ir;  ///< simultaneous method only
    std::vector<double> sdti_ir;
    std::vector<double> even_ir;  ///< present when a negated-signal recording was given
    std::string config_json = "{}";
};

/// Short-time power window used for ir_power_db: 1 ms, at least one sample.
std::size_t ir_power_window(int sample_rate) noexcept;

/// Fills frequency axis, gain_db, rtv_db, sdti_db, ir and ir_power_db.
MeasurementReport make_report(std::string method, const Spectrum& H, std::size_t periods,
                              const std::vector<double>& rtv_level, const std::vector<double>& sdti_level,
                              std::vector<double> ir);

std::string to_json(const MeasurementReport& report);
MeasurementReport report_from_json(std::string_view text);

/// One row per bin: bin, frequency_hz, gain_db, rtv_db, sdti_db.
std::string to_csv(const MeasurementReport& report);

/// Standalone SVG documents; pure functions of the report.
std::string render_spectrum_svg(const MeasurementReport& report);
std::string render_ir_svg(const MeasurementReport& report);

}  // namespace capmeas
