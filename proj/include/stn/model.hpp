#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "stn/harmonic.hpp"
#include "stn/noise.hpp"
#include "stn/transient.hpp"

namespace stn {

class BankFormatError : public std::runtime_error {
 public:
  BankFormatError(const std::string& what, const std::string& field)
      : std::runtime_error(what + " (field: " + field + ")"), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct NoteMetadata {
  int sample_rate = 24000;
  std::size_t hpss_window = 2048;
  std::size_t hpss_hop = 512;
  int median_frames = 31;
  double hpss_margin = 8.0;
  std::string fit_config_hash;
};

/// Complete parameter record for one (key, velocity) note.
struct NoteModel {
  int key_id = 0;    // MIDI note number
  int velocity = 0;  // MIDI velocity
  double f0 = 0.0;
  double inharmonicity = 0.0;  // B >= 0
  double detune = 0.0;         // |delta f| <= 1 Hz
  int partial_count = 0;       // H; alpha arrays have this length
  std::vector<double> alpha_v;
  std::vector<double> alpha_h;
  DampingCoeffs damping;
  NoiseModel noise;
  TransientModel transient;
  NoteMetadata metadata;
};

/// Throws BankFormatError naming the violated field.
void validate_note_model(const NoteModel& model);

/// Velocity layers for one key, sorted by ascending velocity.
struct VelocityBank {
  int key_id = 0;
  std::vector<NoteModel> entries;
};

void validate_bank(const VelocityBank& bank);

inline constexpr int kBankSchemaVersion = 1;

/// UTF-8 JSON with a schema_version field; doubles are written with
/// shortest round-trip precision, so save/load is bit-exact.
void save_bank(const VelocityBank& bank, const std::filesystem::path& path);
VelocityBank load_bank(const std::filesystem::path& path);

/// Linear interpolation between the nearest velocity layers; exact
/// matches are returned as-is and requests outside the stored range
/// clamp to the edge entries.
NoteModel interpolate_velocity(const VelocityBank& bank, int velocity);

}  // namespace stn
