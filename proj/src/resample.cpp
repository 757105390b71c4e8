#include "stn/resample.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stn {

namespace {

constexpr double kKaiserBeta = 8.0;
constexpr int kHalfTaps = 32;  // 64 taps around each output position
constexpr double kCutoffFactor = 0.9;

// Modified Bessel function I0 by its power series.
double bessel_i0(double x) {
  const double q = x * x / 4.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

AudioBuffer resample(const AudioBuffer& in, int target_rate) {
  if (in.sample_rate <= 0 || target_rate <= 0) {
    throw std::invalid_argument("resample: sample rates must be positive");
  }
  if (target_rate == in.sample_rate) return in;

  const double ratio = static_cast<double>(target_rate) / in.sample_rate;
  const std::size_t out_len =
      static_cast<std::size_t>(std::llround(static_cast<double>(in.samples.size()) * ratio));

  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.assign(out_len, 0.0);
  if (in.samples.empty()) return out;

  // Low-pass cutoff in cycles per input sample, pulled below the smaller
  // Nyquist so the Kaiser transition band finishes before it.
  const double cutoff = 0.5 * kCutoffFactor * std::min(1.0, ratio);
  const double i0_beta = bessel_i0(kKaiserBeta);
  const long src = in.sample_rate, dst = target_rate;
  const long len = static_cast<long>(in.samples.size());

  for (std::size_t j = 0; j < out_len; ++j) {
    // Input-domain position of output sample j, split into an exact
    // integer part and a fraction to avoid floating-point drift.
    const long long num = static_cast<long long>(j) * src;
    const long long ipos = num / dst;
    const double frac = static_cast<double>(num % dst) / static_cast<double>(dst);
    double acc = 0.0, norm = 0.0;
    for (long k = static_cast<long>(ipos) - kHalfTaps + 1;
         k <= static_cast<long>(ipos) + kHalfTaps; ++k) {
      const double dt = static_cast<double>(k - ipos) - frac;
      const double u = dt / kHalfTaps;
      if (u <= -1.0 || u >= 1.0) continue;
      const double kaiser = bessel_i0(kKaiserBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      const double h = 2.0 * cutoff * sinc(2.0 * cutoff * dt) * kaiser;
      norm += h;
      if (k >= 0 && k < len) acc += in.samples[static_cast<std::size_t>(k)] * h;
    }
    out.samples[j] = norm > 0.0 ? acc / norm : 0.0;
  }
  return out;
}

}  // namespace stn
