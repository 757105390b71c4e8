#include "stn/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace stn {

WavFormatError::WavFormatError(const std::string& what, std::size_t byte_offset)
    : std::runtime_error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
      offset_(byte_offset) {}

namespace {

constexpr std::uint16_t kFmtPcm = 1;
constexpr std::uint16_t kFmtFloat = 3;
constexpr std::uint16_t kFmtExtensible = 0xFFFE;

std::uint32_t rd_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t rd_u16(const std::vector<std::uint8_t>& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void need(const std::vector<std::uint8_t>& b, std::size_t at, std::size_t count,
          const char* what) {
  if (at + count > b.size()) {
    throw WavFormatError(std::string("truncated file while reading ") + what, at);
  }
}

void push_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(v & 0xFF);
  b.push_back((v >> 8) & 0xFF);
  b.push_back((v >> 16) & 0xFF);
  b.push_back((v >> 24) & 0xFF);
}

void push_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back((v >> 8) & 0xFF);
}

void push_tag(std::vector<std::uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

}  // namespace

WavReadResult read_wav(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw WavFormatError("cannot open " + path.string(), 0);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());

  need(bytes, 0, 12, "RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0) throw WavFormatError("missing RIFF tag", 0);
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavFormatError("missing WAVE tag", 8);
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_at = 0, data_len = 0;

  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const std::size_t chunk_at = at;
    char tag[5] = {0};
    std::memcpy(tag, bytes.data() + at, 4);
    const std::uint32_t chunk_len = rd_u32(bytes, at + 4);
    at += 8;
    need(bytes, at, chunk_len, tag);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw WavFormatError("fmt chunk too short", chunk_at);
      format = rd_u16(bytes, at);
      channels = rd_u16(bytes, at + 2);
      rate = rd_u32(bytes, at + 4);
      bits = rd_u16(bytes, at + 14);
      if (format == kFmtExtensible) {
        // Sub-format GUID starts 24 bytes into the extensible fmt chunk;
        // the first two bytes carry the base format code.
        if (chunk_len < 40) throw WavFormatError("extensible fmt chunk too short", chunk_at);
        format = rd_u16(bytes, at + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data_at = at;
      data_len = chunk_len;
    }
    at += chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  if (!have_fmt) throw WavFormatError("no fmt chunk", bytes.size());
  if (data_at == 0) throw WavFormatError("no data chunk", bytes.size());
  if (channels == 0) throw WavFormatError("zero channels", data_at);
  if (rate == 0) throw WavFormatError("zero sample rate", data_at);

  const bool is_float = format == kFmtFloat;
  if (format != kFmtPcm && !is_float) {
    throw WavFormatError("unsupported format code " + std::to_string(format), data_at);
  }
  if (is_float && bits != 32) {
    throw WavFormatError("only 32-bit float supported", data_at);
  }
  if (!is_float && bits != 16 && bits != 24) {
    throw WavFormatError("only PCM16/PCM24 supported, got " + std::to_string(bits) + " bits",
                         data_at);
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_len / frame_bytes;

  WavReadResult result;
  result.source_channels = channels;
  result.bit_depth = bits;
  result.float_format = is_float;
  result.channel_reduced = channels > 1;
  result.audio.sample_rate = static_cast<int>(rate);
  result.audio.samples.resize(frames);

  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t s = data_at + i * frame_bytes;  // channel 0
    if (is_float) {
      float v;
      std::uint32_t raw = rd_u32(bytes, s);
      std::memcpy(&v, &raw, 4);
      result.audio.samples[i] = static_cast<double>(v);
    } else if (bits == 16) {
      const std::int16_t v = static_cast<std::int16_t>(rd_u16(bytes, s));
      result.audio.samples[i] = static_cast<double>(v) / 32768.0;
    } else {  // 24-bit, sign-extend
      std::int32_t v = bytes[s] | (bytes[s + 1] << 8) | (bytes[s + 2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      result.audio.samples[i] = static_cast<double>(v) / 8388608.0;
    }
  }
  return result;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavFormat format) {
  if (audio.sample_rate <= 0) throw std::invalid_argument("write_wav: bad sample rate");
  const std::size_t n = audio.samples.size();
  const bool is_float = format == WavFormat::Float32;
  const int bits = format == WavFormat::Pcm16 ? 16 : format == WavFormat::Pcm24 ? 24 : 32;
  const std::size_t bytes_per_sample = bits / 8;

  std::vector<std::uint8_t> b;
  b.reserve(64 + n * bytes_per_sample);
  push_tag(b, "RIFF");
  push_u32(b, 0);  // patched below
  push_tag(b, "WAVE");
  push_tag(b, "fmt ");
  push_u32(b, 16);
  push_u16(b, is_float ? kFmtFloat : kFmtPcm);
  push_u16(b, 1);  // mono
  push_u32(b, static_cast<std::uint32_t>(audio.sample_rate));
  push_u32(b, static_cast<std::uint32_t>(audio.sample_rate * bytes_per_sample));
  push_u16(b, static_cast<std::uint16_t>(bytes_per_sample));
  push_u16(b, static_cast<std::uint16_t>(bits));
  if (is_float) {
    push_tag(b, "fact");
    push_u32(b, 4);
    push_u32(b, static_cast<std::uint32_t>(n));
  }
  push_tag(b, "data");
  push_u32(b, static_cast<std::uint32_t>(n * bytes_per_sample));

  for (double s : audio.samples) {
    if (is_float) {
      const float v = static_cast<float>(s);
      std::uint32_t raw;
      std::memcpy(&raw, &v, 4);
      push_u32(b, raw);
    } else if (bits == 16) {
      const double scaled = std::round(s * 32768.0);
      const std::int16_t v =
          static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      push_u16(b, static_cast<std::uint16_t>(v));
    } else {
      const double scaled = std::round(s * 8388608.0);
      const std::int32_t v =
          static_cast<std::int32_t>(std::clamp(scaled, -8388608.0, 8388607.0));
      b.push_back(v & 0xFF);
      b.push_back((v >> 8) & 0xFF);
      b.push_back((v >> 16) & 0xFF);
    }
  }
  if (b.size() & 1) b.push_back(0);

  const std::uint32_t riff_len = static_cast<std::uint32_t>(b.size() - 8);
  b[4] = riff_len & 0xFF;
  b[5] = (riff_len >> 8) & 0xFF;
  b[6] = (riff_len >> 16) & 0xFF;
  b[7] = (riff_len >> 24) & 0xFF;

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  if (!f) throw std::runtime_error("write_wav: write failed for " + path.string());
}

}  // namespace stn
