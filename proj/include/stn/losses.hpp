#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "stn/audio.hpp"

namespace stn {

struct ResolutionLoss {
  std::size_t window = 0;
  double value = 0.0;
  double bin_hz = 0.0;
};

struct LossReport {
  double stft = 0.0;
  double rms = 0.0;
  double cent = 0.0;
  std::vector<ResolutionLoss> per_resolution;
  bool silent_target = false;  // epsilon floor engaged in some denominator
};

inline constexpr std::array<std::size_t, 5> kHarmonicLossWindows{256, 512, 1024, 2048, 4096};
inline constexpr std::array<std::size_t, 4> kTransientLossWindows{32, 64, 128, 256};
inline constexpr std::array<std::size_t, 5> kNoiseLossWindows{32, 64, 128, 256, 512};
inline constexpr std::size_t kRmsLossWindow = 60;
inline constexpr double kRmsLossOverlap = 0.25;
inline constexpr double kSilentFloor = 1e-8;

/// Multi-resolution spectral loss: for each window w (hop = 0.75 w),
/// L_w = ||S_t| - |S_p||_1 / || |S_t| ||_2, averaged over windows.
/// The shorter signal is zero-padded; a silent target engages the
/// epsilon floor and sets the report flag.
LossReport multires_stft_loss(const AudioBuffer& pred, const AudioBuffer& target,
                              const std::vector<std::size_t>& windows);

/// Mean absolute difference of RMS envelopes (window 60, 25% overlap).
double rms_mae_loss(const AudioBuffer& pred, const AudioBuffer& target);

/// Mean |1200 log2(f_pred / f_target)| over the first count partials.
/// Both arrays need at least count entries, all positive.
double cent_loss(const std::vector<double>& pred_partials,
                 const std::vector<double>& target_partials, int count = 6);

}  // namespace stn
