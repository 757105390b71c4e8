#include "stn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stn/fft.hpp"

namespace stn {

namespace {

constexpr std::size_t kPeakWindow = 16384;
constexpr std::size_t kPeakHop = 8192;
constexpr std::size_t kPeakFft = 65536;  // 4x zero padding
constexpr double kPeakAnalysisSeconds = 2.0;
constexpr double kPeakSearchWidth = 0.35;  // times f0_hint, each side
constexpr double kPeakFloorDb = -80.0;

double to_db(double mag) { return 20.0 * std::log10(std::max(mag, 1e-30)); }

}  // namespace

std::vector<PeakEstimate> estimate_partial_peaks(const AudioBuffer& in, double f0_hint,
                                                 int count) {
  if (in.samples.empty()) throw std::invalid_argument("estimate_partial_peaks: empty signal");
  if (in.sample_rate <= 0) throw std::invalid_argument("estimate_partial_peaks: bad rate");
  if (!(f0_hint > 0.0)) throw std::invalid_argument("estimate_partial_peaks: bad f0 hint");
  if (count < 1) throw std::invalid_argument("estimate_partial_peaks: count must be >= 1");

  const std::size_t seg_len = std::min<std::size_t>(
      in.samples.size(),
      static_cast<std::size_t>(kPeakAnalysisSeconds * in.sample_rate));
  const std::vector<double> w = hann_window(kPeakWindow);
  const double full_scale = 0.5 * std::accumulate(w.begin(), w.end(), 0.0);

  // Average magnitude spectrum of Hann frames over the first 2 s,
  // zero-padded 4x for finer bin spacing.
  std::vector<double> avg(kPeakFft / 2 + 1, 0.0);
  std::vector<double> frame(kPeakWindow);
  std::size_t n_frames = 0;
  for (std::size_t start = 0;; start += kPeakHop) {
    for (std::size_t n = 0; n < kPeakWindow; ++n) {
      const std::size_t idx = start + n;
      frame[n] = idx < seg_len ? in.samples[idx] * w[n] : 0.0;
    }
    const auto spec = fft::real_forward(frame.data(), kPeakWindow, kPeakFft);
    for (std::size_t b = 0; b < avg.size(); ++b) avg[b] += std::abs(spec[b]);
    ++n_frames;
    if (start + kPeakWindow >= seg_len) break;
  }
  for (double& v : avg) v /= static_cast<double>(n_frames);

  const double bin_hz = static_cast<double>(in.sample_rate) / kPeakFft;
  std::vector<PeakEstimate> peaks;
  for (int m = 1; m <= count; ++m) {
    const double center = m * f0_hint;
    const double lo_hz = center - kPeakSearchWidth * f0_hint;
    const double hi_hz = center + kPeakSearchWidth * f0_hint;
    const std::size_t lo =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(lo_hz / bin_hz)));
    const std::size_t hi = std::min<std::size_t>(
        avg.size() - 2, static_cast<std::size_t>(std::floor(hi_hz / bin_hz)));
    if (lo > hi) {
      throw EstimationError("search band for partial " + std::to_string(m) +
                                " is outside the spectrum",
                            m);
    }
    std::size_t peak_bin = lo;
    for (std::size_t b = lo + 1; b <= hi; ++b) {
      if (avg[b] > avg[peak_bin]) peak_bin = b;
    }
    // Parabolic interpolation of the log-magnitude around the peak bin.
    const double la = to_db(avg[peak_bin - 1]);
    const double lb = to_db(avg[peak_bin]);
    const double lc = to_db(avg[peak_bin + 1]);
    const double denom = la - 2.0 * lb + lc;
    double p = denom != 0.0 ? 0.5 * (la - lc) / denom : 0.0;
    p = std::clamp(p, -0.5, 0.5);

    PeakEstimate peak;
    peak.partial_index = m;
    peak.frequency_hz = (static_cast<double>(peak_bin) + p) * bin_hz;
    peak.magnitude_db = lb - 0.25 * (la - lc) * p - to_db(full_scale);
    if (peak.magnitude_db < kPeakFloorDb) {
      throw EstimationError("partial " + std::to_string(m) + " below -80 dBFS (" +
                                std::to_string(peak.magnitude_db) + " dB)",
                            m);
    }
    peaks.push_back(peak);
  }
  return peaks;
}

InharmonicityEstimate estimate_inharmonicity(const std::vector<PeakEstimate>& peaks) {
  const std::size_t used = std::min<std::size_t>(peaks.size(), 6);
  if (used < 2) {
    throw std::invalid_argument("estimate_inharmonicity: need at least two peaks");
  }
  InharmonicityEstimate est;
  for (std::size_t a = 0; a < used; ++a) {
    for (std::size_t c = 0; c < used; ++c) {
      if (a == c) continue;
      const double m = static_cast<double>(peaks[a].partial_index);
      const double j = static_cast<double>(peaks[c].partial_index);
      const double r = peaks[a].frequency_hz / peaks[c].frequency_hz;
      const double b = (r * j - m) / (m * m * m - r * j * j * j);
      if (std::isfinite(b) && b >= 0.0) est.samples.push_back(b);
    }
  }
  if (est.samples.empty()) {
    throw EstimationError("no valid pairwise inharmonicity estimates", 0);
  }
  double acc = 0.0;
  for (double b : est.samples) acc += b;
  est.mean = acc / static_cast<double>(est.samples.size());
  return est;
}

double pool_inharmonicity(const std::vector<std::vector<double>>& samples_per_velocity) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& group : samples_per_velocity) {
    for (double b : group) {
      acc += b;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("pool_inharmonicity: no samples");
  return acc / static_cast<double>(n);
}

double estimate_f0(const std::vector<PeakEstimate>& peaks, double inharmonicity) {
  if (peaks.empty()) throw std::invalid_argument("estimate_f0: no peaks");
  double acc = 0.0;
  for (const PeakEstimate& p : peaks) {
    const double m = static_cast<double>(p.partial_index);
    acc += p.frequency_hz / (m * (1.0 + inharmonicity * m * m));
  }
  return acc / static_cast<double>(peaks.size());
}

namespace {

// Median over a clamped 1-D window; upper median for even counts.
class MedianScratch {
 public:
  double compute(const std::vector<double>& mags, std::size_t bins, long frames, long frame,
                 long bin, long half, bool along_time) {
    buf_.clear();
    if (along_time) {
      const long lo = std::max(0L, frame - half);
      const long hi = std::min(frames - 1, frame + half);
      for (long f = lo; f <= hi; ++f) {
        buf_.push_back(mags[static_cast<std::size_t>(f) * bins + static_cast<std::size_t>(bin)]);
      }
    } else {
      const long lo = std::max(0L, bin - half);
      const long hi = std::min(static_cast<long>(bins) - 1, bin + half);
      for (long b = lo; b <= hi; ++b) {
        buf_.push_back(mags[static_cast<std::size_t>(frame) * bins + static_cast<std::size_t>(b)]);
      }
    }
    const std::size_t mid = buf_.size() / 2;
    std::nth_element(buf_.begin(), buf_.begin() + mid, buf_.end());
    return buf_[mid];
  }

 private:
  std::vector<double> buf_;
};

}  // namespace

Decomposition hpss_decompose(const AudioBuffer& in, const HpssSettings& settings,
                             HpssMasks* masks_out) {
  if (in.samples.empty()) throw std::invalid_argument("hpss_decompose: empty signal");
  // Masked spectrograms are not overlap-add consistent, and the thin window
  // coverage at the signal edges turns that inconsistency into large spikes
  // when istft divides by the coverage. Pad with silence so every real sample
  // sees full coverage, then trim. The pad is a whole number of hops, so each
  // retained frame holds exactly the samples it would have without padding.
  const std::size_t pad =
      ((settings.window + settings.hop - 1) / settings.hop) * settings.hop;
  const std::size_t lead = pad / settings.hop;
  AudioBuffer padded;
  padded.sample_rate = in.sample_rate;
  padded.samples.assign(in.samples.size() + 2 * pad, 0.0);
  std::copy(in.samples.begin(), in.samples.end(), padded.samples.begin() + pad);

  const ComplexSpectrogram cs = stft_complex(padded, settings.window, settings.hop);
  const std::size_t frames = cs.frames, bins = cs.bins;

  std::vector<double> mags(cs.data.size());
  for (std::size_t i = 0; i < cs.data.size(); ++i) mags[i] = std::abs(cs.data[i]);

  const long half_t = settings.median_time_frames / 2;
  const long half_f = settings.median_freq_bins / 2;
  std::vector<double> med_time(mags.size()), med_freq(mags.size());
  MedianScratch scratch;
  for (long f = 0; f < static_cast<long>(frames); ++f) {
    for (long b = 0; b < static_cast<long>(bins); ++b) {
      const std::size_t i = static_cast<std::size_t>(f) * bins + static_cast<std::size_t>(b);
      med_time[i] = scratch.compute(mags, bins, static_cast<long>(frames), f, b, half_t, true);
      med_freq[i] = scratch.compute(mags, bins, static_cast<long>(frames), f, b, half_f, false);
    }
  }

  // Hard masks; with margin > 1 the two conditions cannot both hold.
  HpssMasks masks;
  masks.frames = frames;
  masks.bins = bins;
  masks.harmonic.assign(mags.size(), 0);
  masks.percussive.assign(mags.size(), 0);
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (med_time[i] > settings.margin * med_freq[i]) masks.harmonic[i] = 1;
    if (med_freq[i] > settings.margin * med_time[i]) masks.percussive[i] = 1;
  }

  ComplexSpectrogram harm = cs, perc = cs;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    if (!masks.harmonic[i]) harm.data[i] = 0.0;
    if (!masks.percussive[i]) perc.data[i] = 0.0;
  }

  const auto trim_samples = [&](AudioBuffer full) {
    AudioBuffer out;
    out.sample_rate = full.sample_rate;
    out.samples.assign(full.samples.begin() + static_cast<std::ptrdiff_t>(pad),
                       full.samples.begin() + static_cast<std::ptrdiff_t>(pad + in.samples.size()));
    return out;
  };

  Decomposition d;
  d.harmonic = trim_samples(istft(harm, padded.samples.size()));
  d.transient = trim_samples(istft(perc, padded.samples.size()));

  // Export masks and the leftover spectrogram on the unpadded frame grid:
  // padded frame lead + k covers the same samples as unpadded frame k.
  const std::size_t overhang =
      in.samples.size() > settings.window ? in.samples.size() - settings.window : 0;
  const std::size_t out_frames = (overhang + settings.hop - 1) / settings.hop + 1;

  d.noise_spectrogram.frames = out_frames;
  d.noise_spectrogram.bins = bins;
  d.noise_spectrogram.window = settings.window;
  d.noise_spectrogram.hop = settings.hop;
  d.noise_spectrogram.sample_rate = in.sample_rate;
  d.noise_spectrogram.mags.resize(out_frames * bins);
  HpssMasks trimmed;
  trimmed.frames = out_frames;
  trimmed.bins = bins;
  trimmed.harmonic.assign(out_frames * bins, 0);
  trimmed.percussive.assign(out_frames * bins, 0);
  for (std::size_t f = 0; f < out_frames; ++f) {
    for (std::size_t b = 0; b < bins; ++b) {
      const std::size_t src = (lead + f) * bins + b;
      const std::size_t dst = f * bins + b;
      trimmed.harmonic[dst] = masks.harmonic[src];
      trimmed.percussive[dst] = masks.percussive[src];
      const double harm_mag = masks.harmonic[src] ? mags[src] : 0.0;
      const double perc_mag = masks.percussive[src] ? mags[src] : 0.0;
      d.noise_spectrogram.mags[dst] = std::max(mags[src] - harm_mag - perc_mag, 0.0);
    }
  }
  if (masks_out) *masks_out = std::move(trimmed);
  return d;
}

AudioBuffer hpss_residual(const AudioBuffer& original, const Decomposition& d) {
  if (original.samples.size() != d.harmonic.samples.size()) {
    throw std::invalid_argument("hpss_residual: length mismatch");
  }
  AudioBuffer out = original;
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] -= d.harmonic.samples[i] + d.transient.samples[i];
  }
  return out;
}

AudioBuffer extract_transient_clip(const AudioBuffer& percussive) {
  if (percussive.samples.empty()) {
    throw std::invalid_argument("extract_transient_clip: empty signal");
  }
  // Onset: first RMS frame (window 256, 50% overlap) above 10% of the max.
  const std::size_t window = 256;
  const std::vector<double> env = rms_envelope(percussive, window, 0.5);
  const double peak = *std::max_element(env.begin(), env.end());
  std::size_t onset_frame = 0;
  for (std::size_t f = 0; f < env.size(); ++f) {
    if (env[f] > 0.1 * peak) {
      onset_frame = f;
      break;
    }
  }
  const std::size_t onset = onset_frame * rms_hop(window, 0.5);
  AudioBuffer out;
  out.sample_rate = percussive.sample_rate;
  out.samples.assign(1300, 0.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const std::size_t idx = onset + i;
    if (idx < percussive.samples.size()) out.samples[i] = percussive.samples[idx];
  }
  return out;
}

FitTargets make_fit_targets(const AudioBuffer& recording, double f0_hint) {
  FitTargets targets;
  Decomposition d = hpss_decompose(recording);
  targets.noise = hpss_residual(recording, d);
  targets.transient = extract_transient_clip(d.transient);
  targets.peaks = estimate_partial_peaks(d.harmonic, f0_hint);
  targets.harmonic = std::move(d.harmonic);
  return targets;
}

}  // namespace stn
