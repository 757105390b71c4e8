#include "stn/audio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stn {

AudioBuffer make_silence(std::size_t length, int sample_rate) {
  AudioBuffer out;
  out.samples.assign(length, 0.0);
  out.sample_rate = sample_rate;
  return out;
}

AudioBuffer slice(const AudioBuffer& in, std::size_t begin, std::size_t end) {
  begin = std::min(begin, in.samples.size());
  end = std::clamp(end, begin, in.samples.size());
  AudioBuffer out;
  out.sample_rate = in.sample_rate;
  out.samples.assign(in.samples.begin() + begin, in.samples.begin() + end);
  return out;
}

void validate_finite(const AudioBuffer& in, const char* label) {
  for (std::size_t i = 0; i < in.samples.size(); ++i) {
    if (!std::isfinite(in.samples[i])) {
      throw std::invalid_argument(std::string(label) + ": non-finite sample at index " +
                                  std::to_string(i));
    }
  }
}

double peak_abs(const AudioBuffer& in) {
  double peak = 0.0;
  for (double s : in.samples) peak = std::max(peak, std::abs(s));
  return peak;
}

double rms(const AudioBuffer& in) {
  if (in.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : in.samples) acc += s * s;
  return std::sqrt(acc / in.samples.size());
}

AudioBuffer mix(const AudioBuffer& a, const AudioBuffer& b) {
  if (a.samples.size() != b.samples.size() || a.sample_rate != b.sample_rate) {
    throw std::invalid_argument("mix: length or sample rate mismatch");
  }
  AudioBuffer out = a;
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += b.samples[i];
  return out;
}

}  // namespace stn
