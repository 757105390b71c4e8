#pragma once

#include <cstddef>
#include <vector>

namespace stn {

/// Mono sample sequence tagged with its sample rate.
/// Samples are dimensionless amplitudes, nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

AudioBuffer make_silence(std::size_t length, int sample_rate);

/// Copy of samples [begin, end), clamped to the buffer.
AudioBuffer slice(const AudioBuffer& in, std::size_t begin, std::size_t end);

/// Throws std::invalid_argument if any sample is NaN or infinite.
void validate_finite(const AudioBuffer& in, const char* label = "signal");

double peak_abs(const AudioBuffer& in);
double rms(const AudioBuffer& in);

/// Sample-wise a + b. Lengths and rates must match.
AudioBuffer mix(const AudioBuffer& a, const AudioBuffer& b);

}  // namespace stn
