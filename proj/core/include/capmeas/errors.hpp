#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace capmeas {

enum class ErrorKind {
    InvalidLength,
    AsymmetricSpectrum,
    ZeroDenominator,
    InvalidInput,
    InvalidSpan,
    InvalidPeriod,
    InvalidRepetition,
    InvalidTarget,
    GenerationFailed,
    InsufficientData,
    SafeguardRequired,
    InvalidThreshold,
    SimulationOverflow,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by spectral division when denominator bins vanish. Carries the
/// offending bin indices so callers can safeguard exactly those bins.
class ZeroBinError : public Error {
public:
    ZeroBinError(ErrorKind kind, std::vector<std::size_t> bins);

    const std::vector<std::size_t>& bins() const noexcept { return bins_; }

private:
    std::vector<std::size_t> bins_;
};

}  // namespace capmeas
