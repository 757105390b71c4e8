#include "stn/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace stn::fft {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void transform(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");
  if (n == 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wstep(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        // Resync the twiddle periodically so accumulation error stays
        // near machine precision even for long transforms.
        if ((j & 63u) == 0 && j != 0) {
          const double a = ang * static_cast<double>(j);
          w = {std::cos(a), std::sin(a)};
        }
        const std::complex<double> u = data[i + j];
        const std::complex<double> v = data[i + j + len / 2] * w;
        data[i + j] = u + v;
        data[i + j + len / 2] = u - v;
        w *= wstep;
      }
    }
  }

  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

std::vector<std::complex<double>> real_forward(const double* x, std::size_t len,
                                               std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  const std::size_t used = len < n ? len : n;
  for (std::size_t i = 0; i < used; ++i) buf[i] = {x[i], 0.0};
  transform(buf, false);
  buf.resize(n / 2 + 1);
  return buf;
}

std::vector<double> real_inverse(const std::vector<std::complex<double>>& spectrum,
                                 std::size_t n) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fft: size must be a power of two");
  if (spectrum.size() != n / 2 + 1) {
    throw std::invalid_argument("fft: one-sided spectrum must have n/2 + 1 bins");
  }
  std::vector<std::complex<double>> buf(n);
  for (std::size_t k = 0; k <= n / 2; ++k) buf[k] = spectrum[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) buf[k] = std::conj(spectrum[n - k]);
  transform(buf, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace stn::fft
