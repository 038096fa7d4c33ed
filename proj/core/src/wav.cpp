#include "capmeas/wav.hpp"

#include "capmeas/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace capmeas {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

namespace {

constexpr std::uint16_t kTagPcm = 1;
constexpr std::uint16_t kTagFloat = 3;
constexpr std::uint16_t kTagExtensible = 0xFFFE;

template <class T>
T read_le(const std::vector<char>& buf, std::size_t at) {
    T v;
    std::memcpy(&v, buf.data() + at, sizeof(T));
    return v;
}

template <class T>
void put_le(std::string& out, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    out.append(bytes, sizeof(T));
}

// Unreadable or unsupported input is a caller error; failed writes are I/O errors.
[[noreturn]] void input_error(const std::filesystem::path& path, const std::string& what) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + what);
}

[[noreturn]] void io_error(const std::filesystem::path& path, const std::string& what) {
    throw Error(ErrorKind::Io, path.string() + ": " + what);
}

}  // namespace

std::string_view to_string(WavFormat format) noexcept {
    switch (format) {
        case WavFormat::Pcm16: return "pcm16";
        case WavFormat::Float32: return "float32";
        case WavFormat::Float64: return "float64";
    }
    return "float32";
}

WavFormat parse_wav_format(std::string_view name) {
    if (name == "pcm16") return WavFormat::Pcm16;
    if (name == "float32") return WavFormat::Float32;
    if (name == "float64") return WavFormat::Float64;
    throw Error(ErrorKind::InvalidInput, "unknown WAV format '" + std::string(name) + "'");
}

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) input_error(path, "cannot open");
    const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        input_error(path, "not a RIFF/WAVE file");

    std::uint16_t tag = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    std::size_t data_at = 0, data_len = 0;
    for (std::size_t at = 12; at + 8 <= buf.size();) {
        const std::uint32_t len = read_le<std::uint32_t>(buf, at + 4);
        const std::size_t body = at + 8;
        if (body + len > buf.size()) input_error(path, "truncated chunk");
        if (std::memcmp(buf.data() + at, "fmt ", 4) == 0) {
            if (len < 16) input_error(path, "short fmt chunk");
            tag = read_le<std::uint16_t>(buf, body);
            channels = read_le<std::uint16_t>(buf, body + 2);
            rate = read_le<std::uint32_t>(buf, body + 4);
            bits = read_le<std::uint16_t>(buf, body + 14);
            if (tag == kTagExtensible && len >= 26) tag = read_le<std::uint16_t>(buf, body + 24);
            have_fmt = true;
        } else if (std::memcmp(buf.data() + at, "data", 4) == 0) {
            data_at = body;
            data_len = len;
        }
        at = body + len + (len & 1u);
    }
    if (!have_fmt) input_error(path, "missing fmt chunk");
    if (data_at == 0) input_error(path, "missing data chunk");
    if (channels != 1) input_error(path, "only mono files are supported (found " + std::to_string(channels) + " channels)");
    if (rate == 0) input_error(path, "zero sample rate");

    WavData out;
    out.sample_rate = static_cast<int>(rate);
    if (tag == kTagPcm && bits == 16) {
        out.format = WavFormat::Pcm16;
        out.samples.resize(data_len / 2);
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            out.samples[i] = read_le<std::int16_t>(buf, data_at + 2 * i) / 32767.0;
    } else if (tag == kTagFloat && bits == 32) {
        out.format = WavFormat::Float32;
        out.samples.resize(data_len / 4);
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = read_le<float>(buf, data_at + 4 * i);
    } else if (tag == kTagFloat && bits == 64) {
        out.format = WavFormat::Float64;
        out.samples.resize(data_len / 8);
        for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = read_le<double>(buf, data_at + 8 * i);
    } else {
        input_error(path, "unsupported encoding (format tag " + std::to_string(tag) + ", " + std::to_string(bits) + " bits)");
    }
    return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, int sample_rate, WavFormat format) {
    if (sample_rate <= 0) throw Error(ErrorKind::InvalidInput, "sample rate must be positive");
    const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : format == WavFormat::Float32 ? 32 : 64;
    const std::uint16_t tag = format == WavFormat::Pcm16 ? kTagPcm : kTagFloat;
    const std::uint32_t block = bits / 8;
    const auto data_len = static_cast<std::uint32_t>(samples.size() * block);

    std::string out;
    out.reserve(44 + data_len);
    out.append("RIFF");
    put_le<std::uint32_t>(out, 36 + data_len);
    out.append("WAVEfmt ");
    put_le<std::uint32_t>(out, 16);
    put_le<std::uint16_t>(out, tag);
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate) * block);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(block));
    put_le<std::uint16_t>(out, bits);
    out.append("data");
    put_le<std::uint32_t>(out, data_len);
    for (double v : samples) {
        switch (format) {
            case WavFormat::Pcm16:
                put_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(std::clamp(v, -1.0, 1.0) * 32767.0)));
                break;
            case WavFormat::Float32: put_le<float>(out, static_cast<float>(v)); break;
            case WavFormat::Float64: put_le<double>(out, v); break;
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) io_error(path, "cannot open for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) io_error(path, "write failed");
}

}  // namespace capmeas
