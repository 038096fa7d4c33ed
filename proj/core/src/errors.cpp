#include "capmeas/errors.hpp"

#include <sstream>

namespace capmeas {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidLength: return "invalid-length";
        case ErrorKind::AsymmetricSpectrum: return "asymmetric-spectrum";
        case ErrorKind::ZeroDenominator: return "zero-denominator";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::InvalidSpan: return "invalid-span";
        case ErrorKind::InvalidPeriod: return "invalid-period";
        case ErrorKind::InvalidRepetition: return "invalid-repetition";
        case ErrorKind::InvalidTarget: return "invalid-target";
        case ErrorKind::GenerationFailed: return "generation-failed";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::SafeguardRequired: return "safeguard-required";
        case ErrorKind::InvalidThreshold: return "invalid-threshold";
        case ErrorKind::SimulationOverflow: return "simulation-overflow";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

std::string describe_bins(const std::vector<std::size_t>& bins) {
    std::ostringstream os;
    os << bins.size() << " zero bin(s): ";
    const std::size_t shown = bins.size() < 16 ? bins.size() : 16;
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) os << ',';
        os << bins[i];
    }
    if (shown < bins.size()) os << ",...";
    return os.str();
}

}  // namespace

ZeroBinError::ZeroBinError(ErrorKind kind, std::vector<std::size_t> bins)
    : Error(kind, describe_bins(bins)), bins_(std::move(bins)) {}

}  // namespace capmeas
