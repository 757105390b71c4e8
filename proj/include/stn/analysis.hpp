#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stn/audio.hpp"
#include "stn/spectral.hpp"

namespace stn {

/// A partial could not be measured (for example, peak below the floor).
class EstimationError : public std::runtime_error {
 public:
  EstimationError(const std::string& what, int partial_index)
      : std::runtime_error(what), partial_index_(partial_index) {}
  int partial_index() const { return partial_index_; }

 private:
  int partial_index_;
};

struct PeakEstimate {
  int partial_index = 0;  // m, 1-based
  double frequency_hz = 0.0;
  double magnitude_db = 0.0;  // dBFS, full-scale sine = 0 dB
};

/// Strongest spectral peak near each of m * f0_hint, m = 1..count,
/// searched within +-35% of f0_hint around the expected position.
/// Analysis: Hann frames of 16384 samples over the first 2 s, zero-padded
/// 4x, magnitudes averaged, then parabolic interpolation of the
/// log-magnitude around the peak bin. A peak below -80 dBFS raises
/// EstimationError naming the partial.
std::vector<PeakEstimate> estimate_partial_peaks(const AudioBuffer& in, double f0_hint,
                                                 int count = 6);

struct InharmonicityEstimate {
  double mean = 0.0;
  std::vector<double> samples;  // retained pairwise estimates
};

/// Pairwise inversion of the stiff-string series: for every ordered pair
/// (m, j), m != j, of the first 6 peaks,
///   B = (r j - m) / (m^3 - r j^3),  r = f_m / f_j.
/// Negative or non-finite samples are discarded; the estimate is the
/// mean of what remains. 6 peaks give 30 samples.
InharmonicityEstimate estimate_inharmonicity(const std::vector<PeakEstimate>& peaks);

/// Mean of all pairwise samples pooled across velocity layers.
double pool_inharmonicity(const std::vector<std::vector<double>>& samples_per_velocity);

/// Fundamental consistent with measured peaks under inharmonicity B:
/// mean of f_m / (m (1 + B m^2)).
double estimate_f0(const std::vector<PeakEstimate>& peaks, double inharmonicity);

/// Harmonic-percussive-residual split of one recording.
struct Decomposition {
  AudioBuffer harmonic;
  AudioBuffer transient;
  Spectrogram noise_spectrogram;
};

struct HpssSettings {
  std::size_t window = 2048;
  std::size_t hop = 512;
  int median_time_frames = 31;
  int median_freq_bins = 31;
  double margin = 8.0;
};

struct HpssMasks {
  std::vector<std::uint8_t> harmonic;    // frame x bin, hard masks
  std::vector<std::uint8_t> percussive;
  std::size_t frames = 0;
  std::size_t bins = 0;
};

/// Median-filter HPSS: harmonic median across time, percussive median
/// across frequency, hard masks where one median exceeds margin times
/// the other (disjoint for margin > 1). The noise spectrogram is
/// max(|original| - |harmonic| - |percussive|, 0).
Decomposition hpss_decompose(const AudioBuffer& in, const HpssSettings& settings = {},
                             HpssMasks* masks_out = nullptr);

/// Time-domain residual original - harmonic - transient; with hard masks
/// this is the unclassified part of the spectrogram with original phases.
AudioBuffer hpss_residual(const AudioBuffer& original, const Decomposition& d);

/// First 1300 samples of the percussive component starting at the onset
/// frame (first RMS frame above 10% of the envelope maximum).
AudioBuffer extract_transient_clip(const AudioBuffer& percussive);

/// Everything fit_note consumes for one note.
struct FitTargets {
  AudioBuffer harmonic;
  AudioBuffer transient;  // onset-aligned clip, >= 1300 samples
  AudioBuffer noise;      // time-domain residual
  std::vector<PeakEstimate> peaks;
};

FitTargets make_fit_targets(const AudioBuffer& recording, double f0_hint);

}  // namespace stn
