#include "stn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stn/fft.hpp"

namespace stn {

namespace {

std::size_t frame_count(std::size_t len, std::size_t window, std::size_t hop) {
  const std::size_t overhang = len > window ? len - window : 0;
  return (overhang + hop - 1) / hop + 1;
}

void check_stft_args(const AudioBuffer& in, std::size_t window, std::size_t hop) {
  if (in.samples.empty()) throw std::invalid_argument("stft: empty signal");
  if (!fft::is_power_of_two(window)) {
    throw std::invalid_argument("stft: window size must be a power of two");
  }
  if (hop == 0 || hop > window) {
    throw std::invalid_argument("stft: hop must be in [1, window]");
  }
}

}  // namespace

std::vector<double> hann_window(std::size_t n_points) {
  std::vector<double> w(n_points);
  for (std::size_t n = 0; n < n_points; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(n_points));
  }
  return w;
}

ComplexSpectrogram stft_complex(const AudioBuffer& in, std::size_t window, std::size_t hop) {
  check_stft_args(in, window, hop);
  const std::size_t len = in.samples.size();
  const std::vector<double> w = hann_window(window);

  ComplexSpectrogram out;
  out.frames = frame_count(len, window, hop);
  out.bins = window / 2 + 1;
  out.window = window;
  out.hop = hop;
  out.sample_rate = in.sample_rate;
  out.data.resize(out.frames * out.bins);

  std::vector<double> frame(window);
  for (std::size_t f = 0; f < out.frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t n = 0; n < window; ++n) {
      const std::size_t idx = start + n;
      frame[n] = idx < len ? in.samples[idx] * w[n] : 0.0;
    }
    auto spec = fft::real_forward(frame.data(), window, window);
    std::copy(spec.begin(), spec.end(), out.data.begin() + f * out.bins);
  }
  return out;
}

Spectrogram stft(const AudioBuffer& in, std::size_t window, std::size_t hop) {
  ComplexSpectrogram cs = stft_complex(in, window, hop);
  Spectrogram out;
  out.frames = cs.frames;
  out.bins = cs.bins;
  out.window = cs.window;
  out.hop = cs.hop;
  out.sample_rate = cs.sample_rate;
  out.mags.resize(cs.data.size());
  for (std::size_t i = 0; i < cs.data.size(); ++i) out.mags[i] = std::abs(cs.data[i]);
  return out;
}

AudioBuffer istft(const ComplexSpectrogram& in, std::size_t length) {
  if (in.frames == 0 || in.bins == 0) throw std::invalid_argument("istft: empty spectrogram");
  const std::vector<double> w = hann_window(in.window);

  std::vector<double> acc(length, 0.0);
  std::vector<double> norm(length, 0.0);
  std::vector<std::complex<double>> spec(in.bins);
  for (std::size_t f = 0; f < in.frames; ++f) {
    const std::size_t start = f * in.hop;
    if (start >= length) break;
    std::copy(in.data.begin() + f * in.bins, in.data.begin() + (f + 1) * in.bins,
              spec.begin());
    std::vector<double> frame = fft::real_inverse(spec, in.window);
    for (std::size_t n = 0; n < in.window; ++n) {
      const std::size_t idx = start + n;
      if (idx >= length) break;
      acc[idx] += frame[n] * w[n];
      norm[idx] += w[n] * w[n];
    }
  }
  AudioBuffer out;
  out.sample_rate = in.sample_rate;
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.samples[i] = norm[i] > 1e-12 ? acc[i] / norm[i] : 0.0;
  }
  return out;
}

// Orthonormal DCT-II, X_k = s_k sum_n x_n cos(pi (2n+1) k / 2N).
// Direct evaluation with an exact table of cos(pi t / 2N): the index
// (2n+1)k mod 4N never suffers argument-reduction error, and O(N^2) is
// plenty for the lengths used here (<= 8192).
std::vector<double> dct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("dct2: empty input");
  std::vector<double> table(4 * n);
  for (std::size_t t = 0; t < 4 * n; ++t) {
    table[t] = std::cos(std::numbers::pi * static_cast<double>(t) /
                        (2.0 * static_cast<double>(n)));
  }
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    std::size_t idx = k;            // (2*0 + 1) * k mod 4n
    const std::size_t step = 2 * k; // increment per n
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * table[idx];
      idx += step;
      if (idx >= 4 * n) idx -= 4 * n;
    }
    out[k] = (k == 0 ? s0 : sk) * acc;
  }
  return out;
}

std::vector<double> idct2(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("idct2: empty input");
  std::vector<double> table(4 * n);
  for (std::size_t t = 0; t < 4 * n; ++t) {
    table[t] = std::cos(std::numbers::pi * static_cast<double>(t) /
                        (2.0 * static_cast<double>(n)));
  }
  const double s0 = std::sqrt(1.0 / static_cast<double>(n));
  const double sk = std::sqrt(2.0 / static_cast<double>(n));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = s0 * x[0];
    std::size_t idx = 0;
    const std::size_t step = 2 * i + 1;
    for (std::size_t k = 1; k < n; ++k) {
      idx += step;
      if (idx >= 4 * n) idx -= 4 * n;
      acc += sk * x[k] * table[idx];
    }
    out[i] = acc;
  }
  return out;
}

std::size_t rms_hop(std::size_t window, double overlap_fraction) {
  const double hop = std::round(static_cast<double>(window) * (1.0 - overlap_fraction));
  return hop < 1.0 ? 1 : static_cast<std::size_t>(hop);
}

std::vector<double> rms_envelope(const AudioBuffer& in, std::size_t window,
                                 double overlap_fraction) {
  if (in.samples.empty()) throw std::invalid_argument("rms_envelope: empty signal");
  if (window == 0) throw std::invalid_argument("rms_envelope: zero window");
  const std::size_t len = in.samples.size();
  if (window >= len) {
    double acc = 0.0;
    for (double s : in.samples) acc += s * s;
    return {std::sqrt(acc / static_cast<double>(len))};
  }
  const std::size_t hop = rms_hop(window, overlap_fraction);
  const std::size_t frames = frame_count(len, window, hop);
  std::vector<double> out(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t start = f * hop;
    const std::size_t end = std::min(start + window, len);
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += in.samples[i] * in.samples[i];
    out[f] = std::sqrt(acc / static_cast<double>(end - start));
  }
  return out;
}

}  // namespace stn
