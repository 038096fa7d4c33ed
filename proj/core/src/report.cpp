#include "capmeas/report.hpp"

#include "capmeas/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace capmeas {

std::size_t ir_power_window(int sample_rate) noexcept {
    return std::max<std::size_t>(1, static_cast<std::size_t>(sample_rate / 1000));
}

MeasurementReport make_report(std::string method, const Spectrum& H, std::size_t periods,
                              const std::vector<double>& rtv_level, const std::vector<double>& sdti_level,
                              std::vector<double> ir) {
    MeasurementReport r;
    r.sample_rate = H.sample_rate();
    r.N = H.size();
    r.P = periods;
    r.method = std::move(method);
    const std::size_t bins = r.N / 2 + 1;
    if (rtv_level.size() != bins || (!sdti_level.empty() && sdti_level.size() != bins))
        throw Error(ErrorKind::InvalidInput, "level sequences must have N/2 + 1 entries");
    for (std::size_t k = 0; k < bins; ++k) {
        r.frequency_hz.push_back(H.frequency(k));
        r.gain_db.push_back(magnitude_to_db(std::abs(H[k])));
        r.rtv_db.push_back(power_to_db(rtv_level[k]));
        if (!sdti_level.empty()) r.sdti_db.push_back(power_to_db(sdti_level[k]));
    }
    r.ir_power_db = rms_envelope_db(ir, ir_power_window(r.sample_rate));
    r.ir = std::move(ir);
    return r;
}

std::string to_json(const MeasurementReport& r) {
    nlohmann::ordered_json j;
    j["sample_rate"] = r.sample_rate;
    j["N"] = r.N;
    j["P"] = r.P;
    j["method"] = r.method;
    j["frequency_hz"] = r.frequency_hz;
    j["gain_db"] = r.gain_db;
    j["rtv_db"] = r.rtv_db;
    j["sdti_db"] = r.sdti_db;
    j["ir"] = r.ir;
    j["ir_power_db"] = r.ir_power_db;
    if (!r.short_ir.empty()) j["short_ir"] = r.short_ir;
    if (!r.sdti_ir.empty()) j["sdti_ir"] = r.sdti_ir;
    if (!r.even_ir.empty()) j["even_ir"] = r.even_ir;
    j["config"] = nlohmann::ordered_json::parse(r.config_json);
    return j.dump(1) + "\n";
}

MeasurementReport report_from_json(std::string_view text) {
    MeasurementReport r;
    try {
        const auto j = nlohmann::ordered_json::parse(text);
        r.sample_rate = j.at("sample_rate").get<int>();
        r.N = j.at("N").get<std::size_t>();
        r.P = j.at("P").get<std::size_t>();
        r.method = j.at("method").get<std::string>();
        r.frequency_hz = j.at("frequency_hz").get<std::vector<double>>();
        r.gain_db = j.at("gain_db").get<std::vector<double>>();
        r.rtv_db = j.at("rtv_db").get<std::vector<double>>();
        r.sdti_db = j.at("sdti_db").get<std::vector<double>>();
        r.ir = j.at("ir").get<std::vector<double>>();
        r.ir_power_db = j.at("ir_power_db").get<std::vector<double>>();
        if (j.contains("short_ir")) r.short_ir = j.at("short_ir").get<std::vector<std::vector<double>>>();
        if (j.contains("sdti_ir")) r.sdti_ir = j.at("sdti_ir").get<std::vector<double>>();
        if (j.contains("even_ir")) r.even_ir = j.at("even_ir").get<std::vector<double>>();
        r.config_json = j.contains("config") ? j.at("config").dump() : "{}";
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string("report: ") + e.what());
    }
    if (r.sample_rate <= 0 || r.gain_db.size() != r.frequency_hz.size() || r.rtv_db.size() != r.frequency_hz.size())
        throw Error(ErrorKind::InvalidInput, "report: inconsistent fields");
    return r;
}

std::string to_csv(const MeasurementReport& r) {
    std::string out = "bin,frequency_hz,gain_db,rtv_db,sdti_db\n";
    char line[160];
    for (std::size_t k = 0; k < r.frequency_hz.size(); ++k) {
        if (r.sdti_db.empty())
            std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,\n", k, r.frequency_hz[k], r.gain_db[k], r.rtv_db[k]);
        else
            std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", k, r.frequency_hz[k], r.gain_db[k],
                          r.rtv_db[k], r.sdti_db[k]);
        out += line;
    }
    return out;
}

}  // namespace capmeas
