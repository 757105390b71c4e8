#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "stn/audio.hpp"

namespace stn {

/// Magnitude spectrogram, row-major frame x bin, all entries >= 0.
struct Spectrogram {
  std::vector<double> mags;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window = 0;
  std::size_t hop = 0;
  int sample_rate = 0;

  double& at(std::size_t frame, std::size_t bin) { return mags[frame * bins + bin]; }
  double at(std::size_t frame, std::size_t bin) const { return mags[frame * bins + bin]; }
  double bin_hz() const { return window ? static_cast<double>(sample_rate) / window : 0.0; }
};

/// Complex STFT frames; same geometry as Spectrogram.
struct ComplexSpectrogram {
  std::vector<std::complex<double>> data;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t window = 0;
  std::size_t hop = 0;
  int sample_rate = 0;

  std::complex<double>& at(std::size_t frame, std::size_t bin) {
    return data[frame * bins + bin];
  }
  const std::complex<double>& at(std::size_t frame, std::size_t bin) const {
    return data[frame * bins + bin];
  }
};

/// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / n_points).
std::vector<double> hann_window(std::size_t n_points);

/// Hann STFT. window must be a power of two, 1 <= hop <= window, signal
/// non-empty. Frames start at i*hop; the tail frame is zero-padded.
/// Frame count: ceil(max(len - window, 0) / hop) + 1.
Spectrogram stft(const AudioBuffer& in, std::size_t window, std::size_t hop);
ComplexSpectrogram stft_complex(const AudioBuffer& in, std::size_t window, std::size_t hop);

/// Weighted overlap-add inverse of stft_complex, truncated to length.
/// Exact reconstruction wherever the window coverage is nonzero.
AudioBuffer istft(const ComplexSpectrogram& in, std::size_t length);

/// Orthonormal DCT-II and its inverse (DCT-III). Any length >= 1.
std::vector<double> dct2(const std::vector<double>& x);
std::vector<double> idct2(const std::vector<double>& x);

/// Per-frame RMS. Hop = round(window * (1 - overlap_fraction)). A window
/// longer than the signal yields one frame over the whole signal; the
/// tail frame uses the samples that exist (no zero padding).
std::vector<double> rms_envelope(const AudioBuffer& in, std::size_t window,
                                 double overlap_fraction);

std::size_t rms_hop(std::size_t window, double overlap_fraction);

}  // namespace stn
