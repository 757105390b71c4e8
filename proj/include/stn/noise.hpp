#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "stn/audio.hpp"
#include "stn/optimizer.hpp"

namespace stn {

inline constexpr std::size_t kNoiseFftSize = 256;
inline constexpr std::size_t kNoiseHop = 128;
inline constexpr std::size_t kNoiseBins = kNoiseFftSize / 2 + 1;  // 129

/// Filtered-noise component. Parameters live on a coarse grid of
/// frame_size samples; synthesis itself runs on 256-point DFT frames at
/// hop 128 with Hann overlap-add. filter_magnitudes holds filter_frames
/// rows of 129 bins; a single row means a stationary filter. means and
/// amplitudes carry one value per parameter frame, means in [-1, 1] and
/// amplitudes in [0, 1].
struct NoiseModel {
  std::size_t frame_size = 512;
  std::vector<double> filter_magnitudes;
  std::size_t filter_frames = 0;
  std::vector<double> means;
  std::vector<double> amplitudes;
  std::uint64_t seed = 0;

  double filter_at(std::size_t frame, std::size_t bin) const {
    return filter_magnitudes[frame * kNoiseBins + bin];
  }
};

/// Gaussian draw k of synthesis frame `frame`, derived from a counter
/// hash of (seed, note_id, frame, k): identical inputs give identical
/// noise regardless of render order or duration.
double gaussian_draw(std::uint64_t seed, std::uint64_t note_id, std::uint64_t frame,
                     std::uint64_t k);

/// Per synthesis frame: draw unit-variance Gaussian noise with the
/// frame's mean, shape its 256-point spectrum by the filter row, scale by
/// the frame amplitude and overlap-add with a power-normalized Hann
/// window. Deterministic for a given (seed, note_id).
AudioBuffer render_noise(const NoiseModel& model, std::size_t duration, int sample_rate,
                         std::uint64_t note_id = 0);

struct NoiseFitOptions {
  int refine_epochs = 8;
  std::uint64_t note_id = 0;
};

struct NoiseFitResult {
  NoiseModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool silent_target = false;
};

/// Closed-form initialization: the filter profile comes from the
/// target's time-averaged magnitude spectrum (window 256, hop 128)
/// divided by the measured white-noise response of the synthesis chain,
/// and per-frame amplitudes from the RMS envelope on the parameter grid.
/// A bounded number of refinement epochs (8 log-band gains plus a global
/// gain) then runs against the multi-resolution loss (windows 32..512)
/// plus the RMS MAE. Best iterate wins. Silent target: zero amplitudes
/// and a warning flag.
NoiseFitResult fit_noise(const AudioBuffer& target, const OptimizerConfig& config,
                         const NoiseFitOptions& options = {});

}  // namespace stn
