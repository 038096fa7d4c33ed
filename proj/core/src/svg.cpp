#include "capmeas/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace capmeas {

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 30, kBottom = 50;

struct Frame {
    double x0, x1, y0, y1;
    bool log_x;

    double px(double x) const {
        const double t = log_x ? (std::log10(x) - std::log10(x0)) / (std::log10(x1) - std::log10(x0)) : (x - x0) / (x1 - x0);
        return kLeft + t * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        const double t = (std::clamp(y, y0, y1) - y0) / (y1 - y0);
        return kHeight - kBottom - t * (kHeight - kTop - kBottom);
    }
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

std::string header(const std::string& title) {
    std::string s = fmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                        kWidth, kHeight, kWidth, kHeight);
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += fmt("<text x=\"%.1f\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">", kLeft) + title + "</text>\n";
    return s;
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel, const std::vector<double>& xticks,
                 double ystep) {
    std::string s;
    s += fmt("<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"black\"/>\n", kLeft, kTop,
             kWidth - kLeft - kRight, kHeight - kTop - kBottom);
    for (double x : xticks) {
        const double p = f.px(x);
        s += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", p, kTop, p, kHeight - kBottom);
        s += fmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">%g</text>\n", p,
                 kHeight - kBottom + 15, x);
    }
    for (double y = std::ceil(f.y0 / ystep) * ystep; y <= f.y1 + 1e-9; y += ystep) {
        const double p = f.py(y);
        s += fmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", kLeft, p, kWidth - kRight, p);
        s += fmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">%g</text>\n",
                 kLeft - 5, p + 4, y);
    }
    s += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">", (kLeft + kWidth - kRight) / 2,
             kHeight - 10) + xlabel + "</text>\n";
    s += fmt("<text x=\"15\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 %.1f)\">",
             (kTop + kHeight - kBottom) / 2, (kTop + kHeight - kBottom) / 2) + ylabel + "</text>\n";
    return s;
}

std::string polyline(const Frame& f, const std::vector<double>& x, const std::vector<double>& y, std::size_t first,
                     const char* colour) {
    std::string s = std::string("<polyline fill=\"none\" stroke=\"") + colour + "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = first; i < x.size() && i < y.size(); ++i) s += fmt("%.2f,%.2f ", f.px(x[i]), f.py(y[i]));
    s += "\"/>\n";
    return s;
}

std::string legend(const std::vector<std::pair<std::string, const char*>>& items) {
    std::string s;
    double y = kTop + 15;
    for (const auto& [label, colour] : items) {
        s += fmt("<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke-width=\"2\" ", kWidth - kRight - 130, y,
                 kWidth - kRight - 110, y) + "stroke=\"" + colour + "\"/>\n";
        s += fmt("<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\">", kWidth - kRight - 105, y + 4) + label +
             "</text>\n";
        y += 16;
    }
    return s;
}

// Third-octave smoothing of a dB curve, done on power.
std::vector<double> smooth_db(const std::vector<double>& db) {
    std::vector<double> p(db.size());
    for (std::size_t k = 0; k < db.size(); ++k) p[k] = std::pow(10.0, db[k] / 10.0);
    auto s = third_octave_smooth(p);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = power_to_db(s[k]);
    return s;
}

}  // namespace

std::string render_spectrum_svg(const MeasurementReport& r) {
    const auto gain = smooth_db(r.gain_db);
    const auto rtv = smooth_db(r.rtv_db);
    const auto sdti = r.sdti_db.empty() ? std::vector<double>{} : smooth_db(r.sdti_db);

    double top = -1e300;
    for (std::size_t k = 1; k < gain.size(); ++k) top = std::max(top, gain[k]);
    top = std::ceil((top + 5.0) / 10.0) * 10.0;
    Frame f{r.frequency_hz.size() > 1 ? r.frequency_hz[1] : 1.0, r.sample_rate / 2.0, top - 140.0, top, true};

    std::vector<double> ticks;
    for (double t = 1.0; t <= f.x1; t *= 10.0)
        if (t >= f.x0) ticks.push_back(t);

    std::string s = header("Gain and disturbance levels (1/3-octave smoothed), " + r.method);
    s += axes(f, "frequency (Hz)", "level (dB)", ticks, 20.0);
    s += polyline(f, r.frequency_hz, gain, 1, "#1f4fd0");
    s += polyline(f, r.frequency_hz, rtv, 1, "#d02020");
    std::vector<std::pair<std::string, const char*>> items{{"gain", "#1f4fd0"}, {"RTV", "#d02020"}};
    if (!sdti.empty()) {
        s += polyline(f, r.frequency_hz, sdti, 1, "#208040");
        items.emplace_back("SDTI", "#208040");
    }
    s += legend(items);
    s += "</svg>\n";
    return s;
}

std::string render_ir_svg(const MeasurementReport& r) {
    std::vector<double> t_ms(r.ir_power_db.size());
    for (std::size_t n = 0; n < t_ms.size(); ++n) t_ms[n] = 1000.0 * static_cast<double>(n) / r.sample_rate;
    double top = -1e300;
    for (double v : r.ir_power_db) top = std::max(top, v);
    top = std::ceil((top + 5.0) / 10.0) * 10.0;
    const double span_ms = t_ms.empty() ? 1.0 : std::max(t_ms.back(), 1e-3);
    Frame f{0.0, span_ms, top - 160.0, top, false};

    std::vector<double> ticks;
    const double step = std::pow(10.0, std::floor(std::log10(span_ms / 2.0)));
    for (double t = 0.0; t <= span_ms + 1e-9; t += step) ticks.push_back(t);

    std::string s = header("Impulse response power (1 ms window), " + r.method);
    s += axes(f, "time (ms)", "power (dB)", ticks, 20.0);
    s += polyline(f, t_ms, r.ir_power_db, 0, "#1f4fd0");
    s += "</svg>\n";
    return s;
}

}  // namespace capmeas
