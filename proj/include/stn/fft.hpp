#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace stn::fft {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
/// Inverse transform includes the 1/N scale.
void transform(std::vector<std::complex<double>>& data, bool inverse);

/// One-sided spectrum (n/2 + 1 bins) of a real signal. The first len
/// samples of x are used; the frame is zero-padded (or truncated) to n,
/// which must be a power of two.
std::vector<std::complex<double>> real_forward(const double* x, std::size_t len,
                                               std::size_t n);

/// Real signal of length n from a one-sided spectrum of n/2 + 1 bins.
std::vector<double> real_inverse(const std::vector<std::complex<double>>& spectrum,
                                 std::size_t n);

}  // namespace stn::fft
