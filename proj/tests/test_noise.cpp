#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "stn/noise.hpp"
#include "stn/spectral.hpp"
#include "test_util.hpp"

using namespace stn;

namespace {

NoiseModel stationary_model(std::size_t frames, std::uint64_t seed) {
  NoiseModel m;
  m.filter_magnitudes.assign(kNoiseBins, 1.0);
  m.filter_frames = 1;
  m.means.assign(frames, 0.0);
  m.amplitudes.assign(frames, 1.0);
  m.seed = seed;
  return m;
}

std::vector<double> mean_stft_mags(const AudioBuffer& in) {
  const Spectrogram s = stft(in, kNoiseFftSize, kNoiseHop);
  std::vector<double> mean(s.bins, 0.0);
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t b = 0; b < s.bins; ++b) mean[b] += s.at(f, b);
  }
  for (double& v : mean) v /= static_cast<double>(s.frames);
  return mean;
}

}  // namespace

TEST_CASE("gaussian draws are counter-deterministic") {
  CHECK(gaussian_draw(1, 2, 3, 4) == gaussian_draw(1, 2, 3, 4));
  CHECK(gaussian_draw(1, 2, 3, 4) != gaussian_draw(2, 2, 3, 4));
  CHECK(gaussian_draw(1, 2, 3, 4) != gaussian_draw(1, 3, 3, 4));
  CHECK(gaussian_draw(1, 2, 3, 4) != gaussian_draw(1, 2, 4, 4));
  CHECK(gaussian_draw(1, 2, 3, 4) != gaussian_draw(1, 2, 3, 6));
}

TEST_CASE("gaussian draws have unit-normal statistics") {
  const std::size_t frames = 782, per_frame = 128;  // ~1e5 draws
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t k = 0; k < per_frame; ++k) {
      const double x = gaussian_draw(1, 0, f, k);
      sum += x;
      sum_sq += x * x;
      ++n;
    }
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("render_noise is deterministic and seed-sensitive") {
  const NoiseModel model = stationary_model(4, 42);
  const AudioBuffer a = render_noise(model, 1500, 24000, 7);
  const AudioBuffer b = render_noise(model, 1500, 24000, 7);
  CHECK(a.samples == b.samples);

  NoiseModel other_seed = model;
  other_seed.seed = 43;
  CHECK(render_noise(other_seed, 1500, 24000, 7).samples != a.samples);
  CHECK(render_noise(model, 1500, 24000, 8).samples != a.samples);
}

TEST_CASE("render_noise prefix does not depend on duration") {
  const NoiseModel model = stationary_model(4, 9);
  const AudioBuffer shorter = render_noise(model, 500, 24000);
  const AudioBuffer longer = render_noise(model, 1500, 24000);
  for (std::size_t i = 0; i < 500; ++i) CHECK(shorter.samples[i] == longer.samples[i]);
}

TEST_CASE("unit filter at amplitude one renders unit-power noise") {
  const NoiseModel model = stationary_model(240, 42);
  const AudioBuffer out = render_noise(model, 120000, 24000);
  CHECK(rms(out) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("frame mean shifts the rendered noise") {
  NoiseModel model = stationary_model(8, 5);
  model.means.assign(8, 0.9);
  const AudioBuffer up = render_noise(model, 4096, 24000);
  model.means.assign(8, -0.9);
  const AudioBuffer down = render_noise(model, 4096, 24000);
  double mean_up = 0.0, mean_down = 0.0;
  for (double v : up.samples) mean_up += v;
  for (double v : down.samples) mean_down += v;
  CHECK(mean_up / up.size() > 0.1);
  CHECK(mean_down / down.size() < -0.1);
}

TEST_CASE("filter magnitudes shape the rendered spectrum") {
  NoiseModel model = stationary_model(120, 11);
  for (std::size_t b = 32; b < kNoiseBins; ++b) model.filter_magnitudes[b] = 0.0;
  const AudioBuffer out = render_noise(model, 60000, 24000);
  const std::vector<double> mags = mean_stft_mags(out);
  double low = 0.0, high = 0.0;
  for (std::size_t b = 0; b <= 30; ++b) low += mags[b] * mags[b];
  for (std::size_t b = 45; b < kNoiseBins; ++b) high += mags[b] * mags[b];
  CHECK(high < 0.01 * low);
}

TEST_CASE("zero amplitudes render exact silence") {
  NoiseModel model = stationary_model(4, 3);
  model.amplitudes.assign(4, 0.0);
  const AudioBuffer out = render_noise(model, 2000, 24000);
  for (double v : out.samples) CHECK(v == 0.0);
}

TEST_CASE("amplitude grid gates frames coarsely") {
  NoiseModel model = stationary_model(2, 21);
  model.amplitudes = {1.0, 0.0};
  const AudioBuffer out = render_noise(model, 1024, 24000);
  CHECK(testutil::range_rms(out.samples, 0, 512) > 0.3);
  // Every synthesis frame touching the tail is anchored in the silent
  // parameter frame, so the tail is exactly zero.
  for (std::size_t i = 768; i < 1024; ++i) CHECK(out.samples[i] == 0.0);
}

TEST_CASE("render_noise validates the model") {
  NoiseModel model = stationary_model(4, 0);
  model.filter_magnitudes.resize(10);
  CHECK_THROWS_AS(render_noise(model, 100, 24000), std::invalid_argument);
  model = stationary_model(4, 0);
  model.means.clear();
  model.amplitudes.clear();
  CHECK_THROWS_AS(render_noise(model, 100, 24000), std::invalid_argument);
  model = stationary_model(4, 0);
  model.frame_size = 0;
  CHECK_THROWS_AS(render_noise(model, 100, 24000), std::invalid_argument);
}

TEST_CASE("fit_noise recovers a shaped-noise target") {
  NoiseModel truth = stationary_model(24, 77);
  for (std::size_t b = 0; b < kNoiseBins; ++b) {
    const double x = static_cast<double>(b) / 32.0;
    truth.filter_magnitudes[b] = 1.0 / (1.0 + x * x);
  }
  truth.amplitudes.assign(24, 0.6);
  const AudioBuffer target = render_noise(truth, 12000, 24000, 3);

  OptimizerConfig cfg;
  NoiseFitOptions opts;
  opts.refine_epochs = 2;
  opts.note_id = 5;  // the fit must work from its own noise realization
  const NoiseFitResult fit = fit_noise(target, cfg, opts);
  CHECK_FALSE(fit.silent_target);
  CHECK(fit.final_loss <= fit.initial_loss);

  const AudioBuffer pred = render_noise(fit.model, 12000, 24000, 5);
  CHECK(rms(pred) == doctest::Approx(rms(target)).epsilon(0.15));

  const std::vector<double> pm = mean_stft_mags(pred);
  const std::vector<double> tm = mean_stft_mags(target);
  double peak = 0.0;
  for (double v : tm) peak = std::max(peak, v);
  for (std::size_t b = 0; b < kNoiseBins; ++b) {
    if (tm[b] > 0.1 * peak) {
      const double db = 20.0 * std::log10(pm[b] / tm[b]);
      CHECK(std::abs(db) < 3.0);
    }
  }
}

TEST_CASE("fit_noise flags a silent target") {
  const AudioBuffer silent = make_silence(4096, 24000);
  OptimizerConfig cfg;
  const NoiseFitResult fit = fit_noise(silent, cfg);
  CHECK(fit.silent_target);
  for (double a : fit.model.amplitudes) CHECK(a == 0.0);
  const AudioBuffer out = render_noise(fit.model, 4096, 24000);
  for (double v : out.samples) CHECK(v == 0.0);

  AudioBuffer empty;
  empty.sample_rate = 24000;
  CHECK_THROWS_AS(fit_noise(empty, cfg), std::invalid_argument);
}
