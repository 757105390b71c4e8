#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "stn/model.hpp"
#include "test_util.hpp"

using namespace stn;

namespace {

NoteModel valid_note(int key, int velocity) {
  NoteModel m;
  m.key_id = key;
  m.velocity = velocity;
  m.f0 = 261.63;
  m.inharmonicity = 3e-4;
  m.detune = 0.1;
  m.partial_count = 3;
  m.alpha_v = {0.5, 0.25, 0.125};
  m.alpha_h = {0.2, 0.1, 0.05};
  m.damping = {0.5, 1e-2, 1e-9, 1e-4};
  m.noise.frame_size = 512;
  m.noise.filter_magnitudes.assign(kNoiseBins, 1.0);
  m.noise.filter_frames = 1;
  m.noise.means = {0.0, 0.1};
  m.noise.amplitudes = {0.3, 0.2};
  m.noise.seed = 42;
  m.transient.dct_coeffs.assign(kTransientLength, 0.0);
  m.transient.dct_coeffs[3] = 0.7;
  m.transient.gain = 1.0;
  m.metadata.fit_config_hash = "test";
  return m;
}

std::string field_of(const std::function<void()>& op) {
  try {
    op();
  } catch (const BankFormatError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("bank save/load round-trips doubles bit-exactly") {
  NoteModel m = valid_note(60, 64);
  m.f0 = 100.0 * std::numbers::pi;
  m.inharmonicity = 1e-15;
  m.detune = 1.0 / 3.0;
  m.alpha_v = {0.1, 1e-300, -0.25};
  m.damping.b2 = 1e-9 / 3.0;
  m.noise.seed = 0xDEADBEEFCAFEBABEull;
  m.transient.gain = std::nextafter(1.0, 2.0);

  VelocityBank bank;
  bank.key_id = 60;
  bank.entries = {m};

  const auto dir = testutil::scratch_dir("bank_roundtrip");
  const auto path = dir / "key_60.stn.json";
  save_bank(bank, path);
  const VelocityBank loaded = load_bank(path);

  REQUIRE(loaded.entries.size() == 1);
  const NoteModel& r = loaded.entries[0];
  CHECK(loaded.key_id == 60);
  CHECK(r.key_id == m.key_id);
  CHECK(r.velocity == m.velocity);
  CHECK(r.f0 == m.f0);
  CHECK(r.inharmonicity == m.inharmonicity);
  CHECK(r.detune == m.detune);
  CHECK(r.partial_count == m.partial_count);
  CHECK(r.alpha_v == m.alpha_v);
  CHECK(r.alpha_h == m.alpha_h);
  CHECK(r.damping.b0 == m.damping.b0);
  CHECK(r.damping.b1 == m.damping.b1);
  CHECK(r.damping.b2 == m.damping.b2);
  CHECK(r.damping.b3 == m.damping.b3);
  CHECK(r.noise.frame_size == m.noise.frame_size);
  CHECK(r.noise.filter_frames == m.noise.filter_frames);
  CHECK(r.noise.filter_magnitudes == m.noise.filter_magnitudes);
  CHECK(r.noise.means == m.noise.means);
  CHECK(r.noise.amplitudes == m.noise.amplitudes);
  CHECK(r.noise.seed == m.noise.seed);
  CHECK(r.transient.dct_coeffs == m.transient.dct_coeffs);
  CHECK(r.transient.gain == m.transient.gain);
  CHECK(r.metadata.sample_rate == m.metadata.sample_rate);
  CHECK(r.metadata.fit_config_hash == m.metadata.fit_config_hash);
  std::filesystem::remove_all(dir);
}

TEST_CASE("validation errors name the violated field") {
  const struct {
    const char* field;
    std::function<void(NoteModel&)> break_it;
  } cases[] = {
      {"key_id", [](NoteModel& m) { m.key_id = 128; }},
      {"velocity", [](NoteModel& m) { m.velocity = 0; }},
      {"f0", [](NoteModel& m) { m.f0 = -1.0; }},
      {"f0", [](NoteModel& m) { m.f0 = std::numeric_limits<double>::quiet_NaN(); }},
      {"inharmonicity", [](NoteModel& m) { m.inharmonicity = -1e-9; }},
      {"detune", [](NoteModel& m) { m.detune = 1.5; }},
      {"partial_count", [](NoteModel& m) { m.partial_count = 0; }},
      {"alpha_v", [](NoteModel& m) { m.alpha_v.push_back(0.0); }},
      {"alpha_h", [](NoteModel& m) { m.alpha_h.pop_back(); }},
      {"alpha_v",
       [](NoteModel& m) { m.alpha_v[0] = std::numeric_limits<double>::infinity(); }},
      {"damping.b1",
       [](NoteModel& m) { m.damping.b1 = std::numeric_limits<double>::quiet_NaN(); }},
      {"noise.frame_size", [](NoteModel& m) { m.noise.frame_size = 0; }},
      {"noise.filter_frames", [](NoteModel& m) { m.noise.filter_frames = 0; }},
      {"noise.filter_magnitudes", [](NoteModel& m) { m.noise.filter_magnitudes.pop_back(); }},
      {"noise.filter_magnitudes", [](NoteModel& m) { m.noise.filter_magnitudes[5] = -0.1; }},
      {"noise.means",
       [](NoteModel& m) {
         m.noise.means.clear();
         m.noise.amplitudes.clear();
       }},
      {"noise.amplitudes", [](NoteModel& m) { m.noise.amplitudes.pop_back(); }},
      {"transient.dct_coeffs", [](NoteModel& m) { m.transient.dct_coeffs.resize(1299); }},
      {"metadata.sample_rate", [](NoteModel& m) { m.metadata.sample_rate = 0; }},
  };
  for (const auto& c : cases) {
    NoteModel m = valid_note(60, 64);
    c.break_it(m);
    CAPTURE(c.field);
    CHECK(field_of([&] { validate_note_model(m); }) == c.field);
  }

  try {
    NoteModel m = valid_note(60, 64);
    m.detune = 2.0;
    validate_note_model(m);
  } catch (const BankFormatError& e) {
    CHECK(std::string(e.what()).find("(field: detune)") != std::string::npos);
  }
}

TEST_CASE("bank-level validation") {
  VelocityBank bank;
  bank.key_id = 60;
  CHECK(field_of([&] { validate_bank(bank); }) == "entries");

  bank.entries = {valid_note(61, 30)};
  CHECK(field_of([&] { validate_bank(bank); }) == "key_id");

  bank.entries = {valid_note(60, 50), valid_note(60, 30)};
  try {
    validate_bank(bank);
    FAIL("expected BankFormatError");
  } catch (const BankFormatError& e) {
    CHECK(std::string(e.what()).find("not sorted") != std::string::npos);
  }

  bank.entries = {valid_note(60, 30), valid_note(60, 30)};  // duplicates are unsorted too
  CHECK(field_of([&] { validate_bank(bank); }) == "entries");
}

TEST_CASE("load_bank rejects malformed documents") {
  const auto dir = testutil::scratch_dir("bank_malformed");
  auto write_text = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    return dir / name;
  };

  CHECK_THROWS_AS(load_bank(dir / "missing.json"), std::runtime_error);
  CHECK(field_of([&] { load_bank(write_text("junk.json", "not json")); }) == "document");
  CHECK(field_of([&] { load_bank(write_text("noschema.json", R"({"key_id": 60})")); }) ==
        "schema_version");
  CHECK(field_of([&] {
          load_bank(write_text("badschema.json",
                               R"({"schema_version": 99, "key_id": 60, "entries": []})"));
        }) == "schema_version");
  CHECK(field_of([&] {
          load_bank(write_text("badnote.json",
                               R"({"schema_version": 1, "key_id": 60, "entries": [{}]})"));
        }) == "note");
  std::filesystem::remove_all(dir);
}

TEST_CASE("velocity interpolation blends neighbouring layers") {
  NoteModel a = valid_note(60, 40);
  NoteModel b = valid_note(60, 80);
  b.f0 = 262.63;
  b.alpha_v = {0.7, 0.35, 0.175};
  b.damping.b0 = 0.7;
  b.transient.gain = 3.0;
  b.noise.amplitudes = {0.5, 0.4};
  VelocityBank bank;
  bank.key_id = 60;
  bank.entries = {a, b};

  const NoteModel mid = interpolate_velocity(bank, 60);
  CHECK(mid.velocity == 60);
  CHECK(mid.f0 == doctest::Approx(0.5 * (a.f0 + b.f0)));
  CHECK(mid.alpha_v[0] == doctest::Approx(0.6));
  CHECK(mid.damping.b0 == doctest::Approx(0.6));
  CHECK(mid.transient.gain == doctest::Approx(2.0));
  CHECK(mid.noise.amplitudes[0] == doctest::Approx(0.4));
  CHECK(mid.partial_count == 3);

  const NoteModel exact = interpolate_velocity(bank, 80);
  CHECK(exact.f0 == b.f0);
  CHECK(exact.velocity == 80);

  CHECK(interpolate_velocity(bank, 1).velocity == 40);    // clamps low
  CHECK(interpolate_velocity(bank, 127).velocity == 80);  // clamps high
}

TEST_CASE("the bundled example bank loads and validates") {
  const std::filesystem::path path =
      std::filesystem::path(STN_SOURCE_DIR) / "docs" / "example_bank.stn.json";
  const VelocityBank bank = load_bank(path);
  CHECK(bank.key_id == 60);
  CHECK_FALSE(bank.entries.empty());
}

TEST_CASE("a realistic note model fits the compact footprint budget") {
  // Worst realistic shape: 100 partials, stationary filter, 4 s of
  // parameter frames at 24 kHz, full transient.
  NoteModel m = valid_note(21, 100);
  m.partial_count = 100;
  m.alpha_v.assign(100, 0.01);
  m.alpha_h.assign(100, 0.01);
  m.noise.means.assign(188, 0.0);
  m.noise.amplitudes.assign(188, 0.1);
  const std::size_t doubles = m.alpha_v.size() + m.alpha_h.size() +
                              m.noise.filter_magnitudes.size() + m.noise.means.size() +
                              m.noise.amplitudes.size() + m.transient.dct_coeffs.size() + 16;
  CHECK(doubles * sizeof(double) <= 64 * 1024);
}
