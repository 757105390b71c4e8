#pragma once

#include <cstddef>
#include <vector>

#include "stn/audio.hpp"

namespace stn {

/// Valette-Cuesta style frequency-dependent damping,
///   sigma(f) = pi * (b0 + b1 sqrt(f) + b2 f^3 + b3 f) / sample_rate
/// in nepers per sample. Coefficients are used through |b_i|.
struct DampingCoeffs {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
};

enum class PartialFamily {
  vertical,
  horizontal,
  phantom_even_v,
  phantom_even_h,
  phantom_odd,
};

/// One renderable family of exponentially decaying sinusoids.
/// frequencies strictly increasing, amplitudes in [-1, 1], decay rates
/// (nepers/sample) >= 0; all arrays the same length.
struct PartialSet {
  std::vector<double> frequencies;
  std::vector<double> amplitudes;
  std::vector<double> decay_rates;
  PartialFamily family = PartialFamily::vertical;
};

/// Transverse string parameters for one note: fundamental, inharmonicity
/// and the horizontal-polarization detune, with per-partial amplitudes.
struct PolarizationParams {
  double f0 = 0.0;
  double inharmonicity = 0.0;  // B
  double detune = 0.0;         // delta f in Hz, horizontal only
  std::vector<double> alpha_v;
  std::vector<double> alpha_h;
};

/// Stiff-string partial series f_m = m * f0 * (1 + B m^2), m = 1..count,
/// truncated below nyquist. f0 must be positive and below nyquist; B >= 0.
std::vector<double> partial_frequencies(double f0, double inharmonicity, int count,
                                        double nyquist);

/// Largest m with f_m < 0.45 * sample_rate, capped at 100.
int default_partial_count(double f0, double inharmonicity, int sample_rate);

std::vector<double> decay_rates(const std::vector<double>& frequencies,
                                const DampingCoeffs& damping, int sample_rate);

/// Phantom partial families generated from the two transverse sets:
/// even phantoms at 2 f_m with amplitude alpha_m^2 and decay 2 sigma_m
/// (one family per polarization), odd phantoms at f_n +- f_m for
/// consecutive partials |n - m| = 1 with amplitude alpha_n alpha_m and
/// decay sigma_n + sigma_m. Only entries with frequency >= 10 * f0 and
/// below nyquist are kept; empty families are dropped.
std::vector<PartialSet> phantom_partials(const PartialSet& vertical,
                                         const PartialSet& horizontal, double f0,
                                         double nyquist);

/// Adds alpha * exp(-sigma n) * sin(2 pi f n / fs) for every partial.
void accumulate_partials(const PartialSet& set, std::vector<double>& out,
                         int sample_rate);

AudioBuffer render_partial_set(const PartialSet& set, std::size_t duration,
                               int sample_rate);

/// Builds the vertical (f0, B) and horizontal (f0 + detune, B) families,
/// shares the damping law between them, optionally adds phantoms, and
/// renders the sum. Amplitudes are clipped to [-1, 1]; initial phases are
/// all zero.
AudioBuffer render_harmonic(const PolarizationParams& params, const DampingCoeffs& damping,
                            std::size_t duration, int sample_rate,
                            bool include_phantoms = true);

/// The two transverse families exactly as render_harmonic lays them out.
std::vector<PartialSet> transverse_sets(const PolarizationParams& params,
                                        const DampingCoeffs& damping, int sample_rate);

}  // namespace stn
