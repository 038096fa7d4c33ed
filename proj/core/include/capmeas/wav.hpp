#pragma once

// Mono RIFF/WAVE I/O. PCM16 and IEEE float (32 and 64 bit).

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace capmeas {

enum class WavFormat { Pcm16, Float32, Float64 };

std::string_view to_string(WavFormat format) noexcept;
WavFormat parse_wav_format(std::string_view name);

struct WavData {
    std::vector<double> samples;
    int sample_rate = 0;
    WavFormat format = WavFormat::Float32;
};

/// Reads a mono file. Unreadable, multi-channel or unsupported files raise InvalidInput.
/// PCM16 samples map to value / 32767 (the inverse of write_wav).
WavData read_wav(const std::filesystem::path& path);

/// PCM16 clips to [-1, 1] and rounds value * 32767.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, int sample_rate, WavFormat format);

}  // namespace capmeas
