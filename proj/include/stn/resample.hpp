#pragma once

#include "stn/audio.hpp"

namespace stn {

/// Windowed-sinc resampler (Kaiser beta = 8, 64 taps around each output
/// sample). Output length = round(len * target / source). Equal rates
/// return the input unchanged.
AudioBuffer resample(const AudioBuffer& in, int target_rate);

/// Canonical internal rate for analysis and synthesis.
inline constexpr int kModelRate = 24000;

}  // namespace stn
