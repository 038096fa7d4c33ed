#pragma once

// Thin FFTW wrapper. Plans are cached per length and shared across threads;
// execution uses the new-array interface so concurrent calls are safe.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace capmeas::fft {

/// Real-to-half-complex transform: returns n/2 + 1 bins of the unnormalized DFT.
std::vector<std::complex<double>> forward_real(std::span<const double> x);

/// Half-complex-to-real inverse with the 1/n factor applied. `half` holds
/// n/2 + 1 bins.
std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n);

/// Complex-to-complex transforms (inverse carries 1/n).
std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x);
std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> x);

}  // namespace capmeas::fft
