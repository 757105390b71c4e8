#include "stn/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "stn/spectral.hpp"

namespace stn {

namespace {

// Zero-pads the shorter signal so both have the same length.
void equalize(AudioBuffer& a, AudioBuffer& b) {
  const std::size_t n = std::max(a.samples.size(), b.samples.size());
  a.samples.resize(n, 0.0);
  b.samples.resize(n, 0.0);
}

}  // namespace

LossReport multires_stft_loss(const AudioBuffer& pred, const AudioBuffer& target,
                              const std::vector<std::size_t>& windows) {
  if (windows.empty()) throw std::invalid_argument("multires_stft_loss: no windows");
  if (pred.sample_rate != target.sample_rate) {
    throw std::invalid_argument("multires_stft_loss: sample rate mismatch");
  }
  AudioBuffer p = pred, t = target;
  equalize(p, t);
  if (p.samples.empty()) throw std::invalid_argument("multires_stft_loss: empty signals");

  LossReport report;
  double sum = 0.0;
  for (std::size_t w : windows) {
    const std::size_t hop = (3 * w) / 4;  // 25% overlap
    const Spectrogram sp = stft(p, w, hop);
    const Spectrogram st = stft(t, w, hop);
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < sp.mags.size(); ++i) {
      l1 += std::abs(st.mags[i] - sp.mags[i]);
      l2 += st.mags[i] * st.mags[i];
    }
    double denom = std::sqrt(l2);
    if (denom < kSilentFloor) {
      denom = kSilentFloor;
      report.silent_target = true;
    }
    const double value = l1 / denom;
    report.per_resolution.push_back({w, value, st.bin_hz()});
    sum += value;
  }
  report.stft = sum / static_cast<double>(windows.size());
  return report;
}

double rms_mae_loss(const AudioBuffer& pred, const AudioBuffer& target) {
  if (pred.sample_rate != target.sample_rate) {
    throw std::invalid_argument("rms_mae_loss: sample rate mismatch");
  }
  AudioBuffer p = pred, t = target;
  equalize(p, t);
  if (p.samples.empty()) throw std::invalid_argument("rms_mae_loss: empty signals");
  const std::vector<double> ep = rms_envelope(p, kRmsLossWindow, kRmsLossOverlap);
  const std::vector<double> et = rms_envelope(t, kRmsLossWindow, kRmsLossOverlap);
  double acc = 0.0;
  for (std::size_t i = 0; i < ep.size(); ++i) acc += std::abs(ep[i] - et[i]);
  return acc / static_cast<double>(ep.size());
}

double cent_loss(const std::vector<double>& pred_partials,
                 const std::vector<double>& target_partials, int count) {
  if (count < 1) throw std::invalid_argument("cent_loss: count must be >= 1");
  if (pred_partials.size() < static_cast<std::size_t>(count) ||
      target_partials.size() < static_cast<std::size_t>(count)) {
    throw std::invalid_argument("cent_loss: need at least count partials in each array");
  }
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    const double fp = pred_partials[static_cast<std::size_t>(i)];
    const double ft = target_partials[static_cast<std::size_t>(i)];
    if (!(fp > 0.0) || !(ft > 0.0)) {
      throw std::invalid_argument("cent_loss: non-positive frequency");
    }
    acc += std::abs(1200.0 * std::log2(fp / ft));
  }
  return acc / static_cast<double>(count);
}

}  // namespace stn
