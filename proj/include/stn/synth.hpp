#pragma once

#include <cstdint>
#include <optional>

#include "stn/model.hpp"

namespace stn {

struct RenderOptions {
  bool include_phantoms = true;
  bool include_noise = true;
  bool include_transient = true;
  std::optional<std::uint64_t> seed_override;
};

struct RenderResult {
  AudioBuffer harmonic;
  AudioBuffer transient;
  AudioBuffer noise;
  AudioBuffer mix;  // harmonic + transient + noise, in that order
};

/// Renders the three components at the model's sample rate and their
/// exact sample-wise sum. Disabled components render as silence.
RenderResult render_note(const NoteModel& model, std::size_t duration_samples,
                         const RenderOptions& options = {});

/// Equal-temperament frequency for a MIDI note number (A4 = 440 Hz).
double midi_to_frequency(int midi_note);

}  // namespace stn
