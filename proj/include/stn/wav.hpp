#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "stn/audio.hpp"

namespace stn {

/// Malformed RIFF/WAVE data. byte_offset points at the offending field.
class WavFormatError : public std::runtime_error {
 public:
  WavFormatError(const std::string& what, std::size_t byte_offset);
  std::size_t byte_offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct WavReadResult {
  AudioBuffer audio;
  int source_channels = 1;
  int bit_depth = 0;
  bool float_format = false;
  /// True when a multi-channel file was reduced to its first channel.
  bool channel_reduced = false;
};

/// Reads PCM16, PCM24 or float32 WAV. Multi-channel input keeps channel 0
/// and sets channel_reduced. Integer samples are normalized by 2^(bits-1),
/// so PCM16 -32768 maps to exactly -1.0.
WavReadResult read_wav(const std::filesystem::path& path);

enum class WavFormat { Pcm16, Pcm24, Float32 };

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavFormat format = WavFormat::Float32);

}  // namespace stn
