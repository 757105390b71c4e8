#include "stn/transient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stn/losses.hpp"
#include "stn/spectral.hpp"

namespace stn {

namespace {

constexpr int kBandCount = 8;
constexpr double kSilentRms = 1e-9;

std::size_t band_of(std::size_t coeff) {
  const std::size_t band_len = (kTransientLength + kBandCount - 1) / kBandCount;
  return std::min<std::size_t>(coeff / band_len, kBandCount - 1);
}

// params = [global gain, 8 band gains] applied to the initial coefficients.
TransientModel apply_params(const std::vector<double>& base,
                            const std::vector<double>& params) {
  TransientModel model;
  model.gain = 1.0;
  model.dct_coeffs.resize(kTransientLength);
  for (std::size_t i = 0; i < kTransientLength; ++i) {
    model.dct_coeffs[i] = base[i] * params[0] * params[1 + band_of(i)];
  }
  return model;
}

}  // namespace

AudioBuffer render_transient(const TransientModel& model, std::size_t total_duration,
                             int sample_rate) {
  if (model.dct_coeffs.size() != kTransientLength) {
    throw std::invalid_argument("render_transient: coefficient vector must have 1300 entries");
  }
  if (total_duration < kTransientLength) {
    throw std::invalid_argument("render_transient: duration shorter than the transient");
  }
  AudioBuffer out = make_silence(total_duration, sample_rate);
  const std::vector<double> head = idct2(model.dct_coeffs);
  for (std::size_t i = 0; i < kTransientLength; ++i) out.samples[i] = model.gain * head[i];
  return out;
}

TransientFitResult fit_transient(const AudioBuffer& target, const OptimizerConfig& config,
                                 const TransientFitOptions& options) {
  if (target.samples.empty()) throw std::invalid_argument("fit_transient: empty target");

  std::vector<double> clip(kTransientLength, 0.0);
  const std::size_t used = std::min<std::size_t>(target.samples.size(), kTransientLength);
  std::copy_n(target.samples.begin(), used, clip.begin());

  TransientFitResult result;
  double clip_sq = 0.0;
  for (double s : clip) clip_sq += s * s;
  if (std::sqrt(clip_sq / kTransientLength) < kSilentRms) {
    result.model.dct_coeffs.assign(kTransientLength, 0.0);
    result.model.gain = 0.0;
    result.silent_target = true;
    return result;
  }

  const std::vector<double> base = dct2(clip);

  AudioBuffer target_clip;
  target_clip.sample_rate = target.sample_rate;
  target_clip.samples = clip;

  const std::vector<std::size_t> windows(kTransientLossWindows.begin(),
                                         kTransientLossWindows.end());
  const auto eval = [&](const std::vector<double>& params) {
    const TransientModel model = apply_params(base, params);
    if (options.domain == TransientLossDomain::DctCoefficients) {
      AudioBuffer pred, tgt;
      pred.sample_rate = tgt.sample_rate = target.sample_rate;
      pred.samples = model.dct_coeffs;
      tgt.samples = base;
      return multires_stft_loss(pred, tgt, windows).stft;
    }
    const AudioBuffer pred = render_transient(model, kTransientLength, target.sample_rate);
    return multires_stft_loss(pred, target_clip, windows).stft;
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

  result.model = apply_params(base, best_params);
  result.final_loss = scheduler.best_loss();
  return result;
}

}  // namespace stn
