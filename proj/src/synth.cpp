#include "stn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stn {

RenderResult render_note(const NoteModel& model, std::size_t duration_samples,
                         const RenderOptions& options) {
  validate_note_model(model);
  if (duration_samples == 0) throw std::invalid_argument("render_note: zero duration");
  const int fs = model.metadata.sample_rate;

  RenderResult out;
  PolarizationParams params;
  params.f0 = model.f0;
  params.inharmonicity = model.inharmonicity;
  params.detune = model.detune;
  params.alpha_v = model.alpha_v;
  params.alpha_h = model.alpha_h;
  out.harmonic =
      render_harmonic(params, model.damping, duration_samples, fs, options.include_phantoms);

  if (options.include_transient) {
    const std::size_t span = std::max(duration_samples, kTransientLength);
    out.transient = render_transient(model.transient, span, fs);
    out.transient.samples.resize(duration_samples, 0.0);
  } else {
    out.transient = make_silence(duration_samples, fs);
  }

  if (options.include_noise) {
    NoiseModel noise = model.noise;
    if (options.seed_override) noise.seed = *options.seed_override;
    out.noise = render_noise(noise, duration_samples, fs, model.key_id);
  } else {
    out.noise = make_silence(duration_samples, fs);
  }

  out.mix.sample_rate = fs;
  out.mix.samples.resize(duration_samples);
  for (std::size_t i = 0; i < duration_samples; ++i) {
    out.mix.samples[i] =
        (out.harmonic.samples[i] + out.transient.samples[i]) + out.noise.samples[i];
  }
  return out;
}

double midi_to_frequency(int midi_note) {
  return 440.0 * std::pow(2.0, (midi_note - 69) / 12.0);
}

}  // namespace stn
