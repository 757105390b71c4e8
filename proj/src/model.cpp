#include "stn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace stn {

using nlohmann::json;

namespace {

void require_finite(double v, const std::string& field) {
  if (!std::isfinite(v)) throw BankFormatError("value is not finite", field);
}

void require_finite(const std::vector<double>& v, const std::string& field) {
  for (double x : v) {
    if (!std::isfinite(x)) throw BankFormatError("array contains a non-finite value", field);
  }
}

json damping_to_json(const DampingCoeffs& d) {
  return json{{"b0", d.b0}, {"b1", d.b1}, {"b2", d.b2}, {"b3", d.b3}};
}

DampingCoeffs damping_from_json(const json& j) {
  DampingCoeffs d;
  d.b0 = j.at("b0").get<double>();
  d.b1 = j.at("b1").get<double>();
  d.b2 = j.at("b2").get<double>();
  d.b3 = j.at("b3").get<double>();
  return d;
}

json note_to_json(const NoteModel& m) {
  json j;
  j["key_id"] = m.key_id;
  j["velocity"] = m.velocity;
  j["f0"] = m.f0;
  j["inharmonicity"] = m.inharmonicity;
  j["detune"] = m.detune;
  j["partial_count"] = m.partial_count;
  j["alpha_v"] = m.alpha_v;
  j["alpha_h"] = m.alpha_h;
  j["damping"] = damping_to_json(m.damping);
  j["noise"] = json{{"frame_size", m.noise.frame_size},
                    {"filter_frames", m.noise.filter_frames},
                    {"filter_magnitudes", m.noise.filter_magnitudes},
                    {"means", m.noise.means},
                    {"amplitudes", m.noise.amplitudes},
                    {"seed", m.noise.seed}};
  j["transient"] = json{{"dct_coeffs", m.transient.dct_coeffs}, {"gain", m.transient.gain}};
  j["metadata"] = json{{"sample_rate", m.metadata.sample_rate},
                       {"hpss_window", m.metadata.hpss_window},
                       {"hpss_hop", m.metadata.hpss_hop},
                       {"median_frames", m.metadata.median_frames},
                       {"hpss_margin", m.metadata.hpss_margin},
                       {"fit_config_hash", m.metadata.fit_config_hash}};
  return j;
}

NoteModel note_from_json(const json& j) {
  NoteModel m;
  try {
    m.key_id = j.at("key_id").get<int>();
    m.velocity = j.at("velocity").get<int>();
    m.f0 = j.at("f0").get<double>();
    m.inharmonicity = j.at("inharmonicity").get<double>();
    m.detune = j.at("detune").get<double>();
    m.partial_count = j.at("partial_count").get<int>();
    m.alpha_v = j.at("alpha_v").get<std::vector<double>>();
    m.alpha_h = j.at("alpha_h").get<std::vector<double>>();
    m.damping = damping_from_json(j.at("damping"));
    const json& n = j.at("noise");
    m.noise.frame_size = n.at("frame_size").get<std::size_t>();
    m.noise.filter_frames = n.at("filter_frames").get<std::size_t>();
    m.noise.filter_magnitudes = n.at("filter_magnitudes").get<std::vector<double>>();
    m.noise.means = n.at("means").get<std::vector<double>>();
    m.noise.amplitudes = n.at("amplitudes").get<std::vector<double>>();
    m.noise.seed = n.at("seed").get<std::uint64_t>();
    const json& t = j.at("transient");
    m.transient.dct_coeffs = t.at("dct_coeffs").get<std::vector<double>>();
    m.transient.gain = t.at("gain").get<double>();
    const json& md = j.at("metadata");
    m.metadata.sample_rate = md.at("sample_rate").get<int>();
    m.metadata.hpss_window = md.at("hpss_window").get<std::size_t>();
    m.metadata.hpss_hop = md.at("hpss_hop").get<std::size_t>();
    m.metadata.median_frames = md.at("median_frames").get<int>();
    m.metadata.hpss_margin = md.at("hpss_margin").get<double>();
    m.metadata.fit_config_hash = md.at("fit_config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw BankFormatError(e.what(), "note");
  }
  return m;
}

}  // namespace

void validate_note_model(const NoteModel& m) {
  if (m.key_id < 0 || m.key_id > 127) throw BankFormatError("MIDI key out of range", "key_id");
  if (m.velocity < 1 || m.velocity > 127) {
    throw BankFormatError("MIDI velocity out of range", "velocity");
  }
  require_finite(m.f0, "f0");
  if (!(m.f0 > 0.0)) throw BankFormatError("fundamental must be positive", "f0");
  require_finite(m.inharmonicity, "inharmonicity");
  if (m.inharmonicity < 0.0) {
    throw BankFormatError("inharmonicity must be non-negative", "inharmonicity");
  }
  require_finite(m.detune, "detune");
  if (std::abs(m.detune) > 1.0) {
    throw BankFormatError("detune exceeds 1 Hz", "detune");
  }
  if (m.partial_count < 1) throw BankFormatError("need at least one partial", "partial_count");
  if (m.alpha_v.size() != static_cast<std::size_t>(m.partial_count)) {
    throw BankFormatError("length does not match partial_count", "alpha_v");
  }
  if (m.alpha_h.size() != static_cast<std::size_t>(m.partial_count)) {
    throw BankFormatError("length does not match partial_count", "alpha_h");
  }
  require_finite(m.alpha_v, "alpha_v");
  require_finite(m.alpha_h, "alpha_h");
  require_finite(m.damping.b0, "damping.b0");
  require_finite(m.damping.b1, "damping.b1");
  require_finite(m.damping.b2, "damping.b2");
  require_finite(m.damping.b3, "damping.b3");

  if (m.noise.frame_size == 0) throw BankFormatError("frame size must be > 0", "noise.frame_size");
  if (m.noise.filter_frames == 0) {
    throw BankFormatError("need at least one filter frame", "noise.filter_frames");
  }
  if (m.noise.filter_magnitudes.size() != m.noise.filter_frames * kNoiseBins) {
    throw BankFormatError("magnitude table has wrong shape", "noise.filter_magnitudes");
  }
  require_finite(m.noise.filter_magnitudes, "noise.filter_magnitudes");
  for (double v : m.noise.filter_magnitudes) {
    if (v < 0.0) throw BankFormatError("filter magnitudes must be >= 0", "noise.filter_magnitudes");
  }
  if (m.noise.means.empty()) throw BankFormatError("parameter grid is empty", "noise.means");
  if (m.noise.means.size() != m.noise.amplitudes.size()) {
    throw BankFormatError("grid rows disagree in length", "noise.amplitudes");
  }
  require_finite(m.noise.means, "noise.means");
  require_finite(m.noise.amplitudes, "noise.amplitudes");

  if (m.transient.dct_coeffs.size() != kTransientLength) {
    throw BankFormatError("expected 1300 coefficients", "transient.dct_coeffs");
  }
  require_finite(m.transient.dct_coeffs, "transient.dct_coeffs");
  require_finite(m.transient.gain, "transient.gain");

  if (m.metadata.sample_rate <= 0) {
    throw BankFormatError("sample rate must be positive", "metadata.sample_rate");
  }
}

void validate_bank(const VelocityBank& bank) {
  if (bank.entries.empty()) throw BankFormatError("bank has no entries", "entries");
  for (const NoteModel& m : bank.entries) {
    validate_note_model(m);
    if (m.key_id != bank.key_id) {
      throw BankFormatError("entry key does not match bank key", "key_id");
    }
  }
  for (std::size_t i = 1; i < bank.entries.size(); ++i) {
    if (bank.entries[i].velocity <= bank.entries[i - 1].velocity) {
      throw BankFormatError("entries not sorted by ascending velocity", "entries");
    }
  }
}

void save_bank(const VelocityBank& bank, const std::filesystem::path& path) {
  validate_bank(bank);
  json j;
  j["schema_version"] = kBankSchemaVersion;
  j["key_id"] = bank.key_id;
  json entries = json::array();
  for (const NoteModel& m : bank.entries) entries.push_back(note_to_json(m));
  j["entries"] = std::move(entries);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(1, '\t') << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

VelocityBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw BankFormatError(e.what(), "document");
  }
  if (!j.contains("schema_version")) {
    throw BankFormatError("missing schema version", "schema_version");
  }
  if (j.at("schema_version").get<int>() != kBankSchemaVersion) {
    throw BankFormatError("unsupported schema version", "schema_version");
  }
  VelocityBank bank;
  try {
    bank.key_id = j.at("key_id").get<int>();
    for (const json& e : j.at("entries")) bank.entries.push_back(note_from_json(e));
  } catch (const json::exception& e) {
    throw BankFormatError(e.what(), "entries");
  }
  validate_bank(bank);
  return bank;
}

NoteModel interpolate_velocity(const VelocityBank& bank, int velocity) {
  validate_bank(bank);
  const auto& entries = bank.entries;
  if (velocity <= entries.front().velocity) return entries.front();
  if (velocity >= entries.back().velocity) return entries.back();
  std::size_t hi = 1;
  while (entries[hi].velocity < velocity) ++hi;
  const NoteModel& a = entries[hi - 1];
  const NoteModel& b = entries[hi];
  if (entries[hi].velocity == velocity) return b;

  const double t = static_cast<double>(velocity - a.velocity) /
                   static_cast<double>(b.velocity - a.velocity);
  auto lerp = [t](double x, double y) { return x + t * (y - x); };
  auto lerp_vec = [&lerp](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> out(std::min(x.size(), y.size()));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lerp(x[i], y[i]);
    return out;
  };

  NoteModel out = a;
  out.velocity = velocity;
  out.f0 = lerp(a.f0, b.f0);
  out.inharmonicity = lerp(a.inharmonicity, b.inharmonicity);
  out.detune = lerp(a.detune, b.detune);
  out.alpha_v = lerp_vec(a.alpha_v, b.alpha_v);
  out.alpha_h = lerp_vec(a.alpha_h, b.alpha_h);
  out.partial_count = static_cast<int>(out.alpha_v.size());
  out.damping.b0 = lerp(a.damping.b0, b.damping.b0);
  out.damping.b1 = lerp(a.damping.b1, b.damping.b1);
  out.damping.b2 = lerp(a.damping.b2, b.damping.b2);
  out.damping.b3 = lerp(a.damping.b3, b.damping.b3);
  if (a.noise.filter_magnitudes.size() == b.noise.filter_magnitudes.size() &&
      a.noise.frame_size == b.noise.frame_size) {
    out.noise.filter_magnitudes = lerp_vec(a.noise.filter_magnitudes, b.noise.filter_magnitudes);
  }
  out.noise.means = lerp_vec(a.noise.means, b.noise.means);
  out.noise.amplitudes = lerp_vec(a.noise.amplitudes, b.noise.amplitudes);
  out.transient.dct_coeffs = lerp_vec(a.transient.dct_coeffs, b.transient.dct_coeffs);
  out.transient.gain = lerp(a.transient.gain, b.transient.gain);
  return out;
}

}  // namespace stn
