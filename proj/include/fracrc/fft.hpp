#pragma once

#include <complex>
#include <span>
#include <vector>

namespace fracrc::fft {

/// Non-negative-frequency half spectrum of a real series (n/2 + 1 bins),
/// unnormalized: X_k = sum_t x_t exp(-2 pi i k t / n).
std::vector<std::complex<double>> forward_real(std::span<const double> x);

/// Inverse of forward_real for a series of length n, normalized by 1/n.
/// The imaginary parts of bin 0 and (for even n) bin n/2 are ignored.
std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t n);

/// Index of the largest-power non-DC bin of the mean-removed series; 0 if
/// the series is constant.
std::size_t dominant_bin(std::span<const double> x);

/// Power-weighted mean bin index over the non-DC bins of the mean-removed
/// series; 0 if the series is constant.
double mean_frequency_bin(std::span<const double> x);

}  // namespace fracrc::fft
