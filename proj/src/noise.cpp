#include "stn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stn/fft.hpp"
#include "stn/losses.hpp"
#include "stn/spectral.hpp"

namespace stn {

namespace {

constexpr double kSilentRms = 1e-9;
constexpr std::uint64_t kCalibrationSeed = 0x5714c0ffee;
constexpr int kBandCount = 8;

// splitmix64 finalizer; good avalanche for counter hashing.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_model(const NoiseModel& model) {
  if (model.frame_size == 0) throw std::invalid_argument("noise: frame_size must be >= 1");
  if (model.filter_frames == 0 ||
      model.filter_magnitudes.size() != model.filter_frames * kNoiseBins) {
    throw std::invalid_argument("noise: filter_magnitudes must be filter_frames x 129");
  }
  if (model.means.size() != model.amplitudes.size() || model.means.empty()) {
    throw std::invalid_argument("noise: means and amplitudes must be equal-length, non-empty");
  }
}

std::size_t band_of(std::size_t bin) {
  const std::size_t band_len = (kNoiseBins + kBandCount - 1) / kBandCount;
  return std::min<std::size_t>(bin / band_len, kBandCount - 1);
}

}  // namespace

double gaussian_draw(std::uint64_t seed, std::uint64_t note_id, std::uint64_t frame,
                     std::uint64_t k) {
  const std::uint64_t h = mix64(seed ^ mix64(note_id ^ mix64(frame ^ mix64(k >> 1))));
  const double u1 = (static_cast<double>(h >> 32) + 1.0) / 4294967296.0;  // (0, 1]
  const double u2 = static_cast<double>(h & 0xFFFFFFFFull) / 4294967296.0;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return (k & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

AudioBuffer render_noise(const NoiseModel& model, std::size_t duration, int sample_rate,
                         std::uint64_t note_id) {
  check_model(model);
  AudioBuffer out = make_silence(duration, sample_rate);
  if (duration == 0) return out;

  const std::vector<double> window = hann_window(kNoiseFftSize);
  std::vector<double> num(duration, 0.0);
  std::vector<double> den(duration, 0.0);
  std::vector<double> frame(kNoiseFftSize);
  const std::size_t n_param = model.means.size();

  // Frames start one hop early so sample 0 already has full window
  // coverage; everything before the buffer is discarded.
  for (std::uint64_t f = 0;; ++f) {
    const long long start =
        static_cast<long long>(f) * static_cast<long long>(kNoiseHop) -
        static_cast<long long>(kNoiseHop);
    if (start >= static_cast<long long>(duration)) break;

    const std::size_t anchor = start > 0 ? static_cast<std::size_t>(start) : 0;
    const std::size_t pf = std::min(anchor / model.frame_size, n_param - 1);
    const double mean = std::clamp(model.means[pf], -1.0, 1.0);
    const double amp = std::clamp(model.amplitudes[pf], 0.0, 1.0);
    const std::size_t filter_row = std::min<std::size_t>(pf, model.filter_frames - 1);

    for (std::size_t k = 0; k < kNoiseFftSize; ++k) {
      frame[k] = gaussian_draw(model.seed, note_id, f, k) + mean;
    }
    auto spec = fft::real_forward(frame.data(), kNoiseFftSize, kNoiseFftSize);
    for (std::size_t b = 0; b < kNoiseBins; ++b) {
      spec[b] *= model.filter_at(filter_row, b);
    }
    const std::vector<double> shaped = fft::real_inverse(spec, kNoiseFftSize);

    for (std::size_t n = 0; n < kNoiseFftSize; ++n) {
      const long long idx = start + static_cast<long long>(n);
      if (idx < 0) continue;
      if (idx >= static_cast<long long>(duration)) break;
      num[static_cast<std::size_t>(idx)] += amp * shaped[n] * window[n];
      den[static_cast<std::size_t>(idx)] += window[n] * window[n];
    }
  }

  // Power-normalized overlap-add: with independent frames this keeps a
  // unit-filter render at exactly the source noise power.
  for (std::size_t i = 0; i < duration; ++i) {
    out.samples[i] = den[i] > 1e-12 ? num[i] / std::sqrt(den[i]) : 0.0;
  }
  return out;
}

namespace {

NoiseModel flat_model(std::size_t n_param, std::uint64_t seed) {
  NoiseModel m;
  m.filter_magnitudes.assign(kNoiseBins, 1.0);
  m.filter_frames = 1;
  m.means.assign(n_param, 0.0);
  m.amplitudes.assign(n_param, 1.0);
  m.seed = seed;
  return m;
}

// Mean magnitude per bin of the 256/128 analysis of a signal.
std::vector<double> mean_spectrum(const AudioBuffer& in) {
  const Spectrogram s = stft(in, kNoiseFftSize, kNoiseHop);
  std::vector<double> mean(s.bins, 0.0);
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t b = 0; b < s.bins; ++b) mean[b] += s.at(f, b);
  }
  for (double& v : mean) v /= static_cast<double>(s.frames);
  return mean;
}

NoiseModel apply_refinement(const NoiseModel& base, const std::vector<double>& params) {
  NoiseModel m = base;
  for (std::size_t b = 0; b < kNoiseBins; ++b) {
    m.filter_magnitudes[b] =
        std::abs(base.filter_magnitudes[b] * params[0] * params[1 + band_of(b)]);
  }
  return m;
}

}  // namespace

NoiseFitResult fit_noise(const AudioBuffer& target, const OptimizerConfig& config,
                         const NoiseFitOptions& options) {
  if (target.samples.empty()) throw std::invalid_argument("fit_noise: empty target");
  const std::size_t len = target.samples.size();

  NoiseFitResult result;
  NoiseModel model;
  model.seed = config.seed;
  const std::size_t n_param = (len + model.frame_size - 1) / model.frame_size;

  if (rms(target) < kSilentRms) {
    model.filter_magnitudes.assign(kNoiseBins, 1.0);
    model.filter_frames = 1;
    model.means.assign(n_param, 0.0);
    model.amplitudes.assign(n_param, 0.0);
    result.model = model;
    result.silent_target = true;
    return result;
  }

  // White-noise response of the synthesis chain, measured once with a
  // fixed seed; dividing by it turns the target's average spectrum into
  // the filter profile.
  const std::size_t calib_len = std::max<std::size_t>(len, 2 * kNoiseFftSize * 64);
  const AudioBuffer white = render_noise(
      flat_model(calib_len / 512 + 1, kCalibrationSeed), calib_len, target.sample_rate, 0);
  const std::vector<double> white_profile = mean_spectrum(white);
  const std::vector<double> target_profile = mean_spectrum(target);

  model.filter_frames = 1;
  model.filter_magnitudes.resize(kNoiseBins);
  for (std::size_t b = 0; b < kNoiseBins; ++b) {
    model.filter_magnitudes[b] =
        white_profile[b] > 1e-12 ? target_profile[b] / white_profile[b] : 0.0;
  }
  model.means.assign(n_param, 0.0);
  model.amplitudes.assign(n_param, 1.0);

  // Per-frame envelope relative to the unit-amplitude render of the
  // fitted profile; amplitudes above 1 are folded back into the filter.
  const AudioBuffer unit = render_noise(model, len, target.sample_rate, options.note_id);
  double max_amp = 0.0;
  std::vector<double> amps(n_param, 0.0);
  for (std::size_t i = 0; i < n_param; ++i) {
    const std::size_t begin = i * model.frame_size;
    const std::size_t end = std::min(begin + model.frame_size, len);
    double tgt_sq = 0.0, unit_sq = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      tgt_sq += target.samples[s] * target.samples[s];
      unit_sq += unit.samples[s] * unit.samples[s];
    }
    amps[i] = unit_sq > 1e-20 ? std::sqrt(tgt_sq / unit_sq) : 0.0;
    max_amp = std::max(max_amp, amps[i]);
  }
  if (max_amp > 1.0) {
    for (double& f : model.filter_magnitudes) f *= max_amp;
    for (double& a : amps) a /= max_amp;
  }
  model.amplitudes = amps;

  const std::vector<std::size_t> windows(kNoiseLossWindows.begin(), kNoiseLossWindows.end());
  const auto eval = [&](const std::vector<double>& params) {
    const NoiseModel candidate = apply_refinement(model, params);
    const AudioBuffer pred = render_noise(candidate, len, target.sample_rate, options.note_id);
    return multires_stft_loss(pred, target, windows).stft + rms_mae_loss(pred, target);
  };

  std::vector<double> params(1 + kBandCount, 1.0);
  std::vector<double> best_params = params;
  result.initial_loss = eval(params);
  PlateauScheduler scheduler(config);
  scheduler.observe(result.initial_loss);
  OptimState state;
  for (int epoch = 0; epoch < options.refine_epochs; ++epoch) {
    const std::vector<double> grad = fd_gradient(eval, params, config);
    adam_step(params, grad, state, config, scheduler.learning_rate());
    const double loss = eval(params);
    if (scheduler.observe(loss)) best_params = params;
    if (scheduler.should_stop()) break;
  }

  result.model = apply_refinement(model, best_params);
  result.final_loss = scheduler.best_loss();
  return result;
}

}  // namespace stn
