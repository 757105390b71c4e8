// stnsynth: spectral piano synthesis toolkit.
//
// Subcommands: analyze, fit, render, loss, trichord, bench.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stn/analysis.hpp"
#include "stn/fitting.hpp"
#include "stn/losses.hpp"
#include "stn/model.hpp"
#include "stn/resample.hpp"
#include "stn/synth.hpp"
#include "stn/wav.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs a command body and maps exceptions onto the documented exit codes.
int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const stn::EstimationError& e) {
    std::cerr << "error: analysis failed: " << e.what() << " (partial " << e.partial_index()
              << ")\n";
    return kExitNumerical;
  } catch (const stn::DivergenceError& e) {
    std::cerr << "error: fit diverged: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const stn::WavFormatError& e) {
    std::cerr << "error: bad WAV data: " << e.what() << " (byte " << e.byte_offset() << ")\n";
    return kExitData;
  } catch (const stn::BankFormatError& e) {
    std::cerr << "error: bad model data: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}

stn::AudioBuffer read_model_rate(const fs::path& path) {
  return stn::resample(stn::read_wav(path).audio, stn::kModelRate);
}

int env_threads() {
  if (const char* v = std::getenv("STN_THREADS")) {
    const int t = std::atoi(v);
    if (t >= 1) return t;
  }
  return 1;
}

// MIDI note from either a number ("55") or a name ("G3", "A#3", "Db4");
// C4 = 60.
int parse_key(const std::string& text) {
  if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text[0])) || text[0] == '-')) {
    return std::stoi(text);
  }
  static const int base[7] = {9, 11, 0, 2, 4, 5, 7};  // A B C D E F G
  if (text.size() < 2) throw std::invalid_argument("bad note name: " + text);
  const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  if (letter < 'A' || letter > 'G') throw std::invalid_argument("bad note name: " + text);
  int semitone = base[letter - 'A'];
  std::size_t i = 1;
  if (text[i] == '#') {
    ++semitone;
    ++i;
  } else if (text[i] == 'b') {
    --semitone;
    ++i;
  }
  const int octave = std::stoi(text.substr(i));
  return 12 * (octave + 1) + semitone;
}

fs::path bank_path_for(const fs::path& model_path, int key_id) {
  if (fs::is_directory(model_path)) {
    return model_path / ("key_" + std::to_string(key_id) + ".stn.json");
  }
  return model_path;
}

stn::VelocityBank load_bank_for(const fs::path& model_path, int key_id) {
  const fs::path path = bank_path_for(model_path, key_id);
  if (!fs::exists(path)) {
    throw std::runtime_error("no model for key " + std::to_string(key_id) + ": " +
                             path.string());
  }
  stn::VelocityBank bank = stn::load_bank(path);
  if (bank.key_id != key_id) {
    throw std::runtime_error("model file " + path.string() + " holds key " +
                             std::to_string(bank.key_id) + ", not " + std::to_string(key_id));
  }
  return bank;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void note_artifact(const fs::path& path) { std::cout << "wrote " << path.string() << "\n"; }

// Components quantized to float32 and mixed in float arithmetic, so a
// written mix equals the sample-wise float sum of the written component
// files exactly.
stn::AudioBuffer float_mix(const std::vector<const stn::AudioBuffer*>& parts) {
  stn::AudioBuffer out;
  out.sample_rate = parts.front()->sample_rate;
  out.samples.assign(parts.front()->samples.size(), 0.0);
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    float acc = 0.0f;
    for (const stn::AudioBuffer* p : parts) acc += static_cast<float>(p->samples[i]);
    out.samples[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------- analyze

int run_analyze(const std::string& wav_path, int key_id, const std::string& out_dir) {
  const stn::AudioBuffer rec = read_model_rate(wav_path);
  const double f0_hint = stn::midi_to_frequency(key_id);

  stn::Decomposition d = stn::hpss_decompose(rec);
  const stn::AudioBuffer residual = stn::hpss_residual(rec, d);

  std::vector<stn::PeakEstimate> peaks;
  try {
    peaks = stn::estimate_partial_peaks(d.harmonic, f0_hint);
  } catch (const stn::EstimationError& e) {
    throw stn::EstimationError("missing partial m=" + std::to_string(e.partial_index()) +
                                   "; " + e.what(),
                               e.partial_index());
  }
  const stn::InharmonicityEstimate est = stn::estimate_inharmonicity(peaks);
  const double f0 = stn::estimate_f0(peaks, est.mean);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    auto csv = open_csv(dir / "peaks.csv");
    csv << "partial_index,frequency_hz,magnitude_db\n";
    for (const auto& p : peaks) {
      csv << p.partial_index << "," << fmt_g(p.frequency_hz) << "," << fmt_g(p.magnitude_db)
          << "\n";
    }
    note_artifact(dir / "peaks.csv");
  }
  {
    auto csv = open_csv(dir / "inharmonicity.csv");
    csv << "kind,value\n";
    for (double b : est.samples) csv << "sample," << fmt_g(b) << "\n";
    csv << "mean," << fmt_g(est.mean) << "\n";
    csv << "f0," << fmt_g(f0) << "\n";
    note_artifact(dir / "inharmonicity.csv");
  }
  stn::write_wav(dir / "harmonic.wav", d.harmonic);
  note_artifact(dir / "harmonic.wav");
  stn::write_wav(dir / "percussive.wav", d.transient);
  note_artifact(dir / "percussive.wav");
  stn::write_wav(dir / "residual.wav", residual);
  note_artifact(dir / "residual.wav");

  std::cout << "key " << key_id << ": f0 " << fmt_g(f0) << " Hz, B " << fmt_g(est.mean) << " ("
            << est.samples.size() << " pair samples)\n";
  return kExitOk;
}

// -------------------------------------------------------------------- fit

stn::NoteModel initial_model(int key_id, int velocity, double f0, double b_init,
                             const std::vector<stn::PeakEstimate>& peaks) {
  stn::NoteModel m;
  m.key_id = key_id;
  m.velocity = velocity;
  m.f0 = f0;
  m.inharmonicity = b_init;
  m.detune = 0.1;
  m.partial_count = stn::default_partial_count(f0, b_init, stn::kModelRate);
  m.alpha_v.resize(m.partial_count);
  m.alpha_h.resize(m.partial_count);
  // Measured amplitudes seed the first partials; a 1/m tail continues them.
  std::vector<double> amps(m.partial_count, 0.0);
  double last = 0.05;
  int last_m = 1;
  for (const auto& p : peaks) {
    if (p.partial_index >= 1 && p.partial_index <= m.partial_count) {
      amps[p.partial_index - 1] = std::pow(10.0, p.magnitude_db / 20.0);
      last = amps[p.partial_index - 1];
      last_m = p.partial_index;
    }
  }
  for (int i = 0; i < m.partial_count; ++i) {
    if (amps[i] == 0.0) {
      amps[i] = i + 1 > last_m ? last * last_m / (i + 1) : last;
    }
  }
  for (int i = 0; i < m.partial_count; ++i) {
    m.alpha_v[i] = 2.0 / 3.0 * amps[i];
    m.alpha_h[i] = 1.0 / 3.0 * amps[i];
  }
  m.damping = stn::DampingCoeffs{0.5, 1e-2, 1e-9, 1e-4};
  m.noise.frame_size = 512;
  m.noise.filter_frames = 1;
  m.noise.filter_magnitudes.assign(stn::kNoiseBins, 1.0);
  m.noise.means = {0.0};
  m.noise.amplitudes = {0.0};
  m.transient.dct_coeffs.assign(stn::kTransientLength, 0.0);
  return m;
}

int run_fit(const std::string& wav_dir, int key_id, const std::vector<int>& velocities,
            const std::string& out_model, int stage, int epochs1, int epochs2, int threads) {
  if (velocities.empty()) {
    std::cerr << "error: at least one velocity is required\n";
    return kExitUsage;
  }
  const double f0_hint = stn::midi_to_frequency(key_id);

  struct PerVelocity {
    int velocity;
    stn::FitTargets targets;
    std::vector<double> b_samples;
  };
  std::vector<PerVelocity> work;
  for (int v : velocities) {
    const fs::path path = fs::path(wav_dir) / (std::to_string(key_id) + "_" +
                                               std::to_string(v) + ".wav");
    if (!fs::exists(path)) {
      std::cerr << "error: missing velocity file: expected " << path.string() << "\n";
      return kExitData;
    }
    PerVelocity pv;
    pv.velocity = v;
    pv.targets = stn::make_fit_targets(read_model_rate(path), f0_hint);
    pv.b_samples = stn::estimate_inharmonicity(pv.targets.peaks).samples;
    work.push_back(std::move(pv));
  }

  std::vector<std::vector<double>> pooled;
  for (const auto& pv : work) pooled.push_back(pv.b_samples);
  const double b_init = stn::pool_inharmonicity(pooled);
  std::cout << "pooled B init " << fmt_g(b_init) << " over " << pooled.size()
            << " velocity layers\n";

  stn::FitOptions options;
  options.threads = threads;
  if (stage == 1) {
    options.run_stage2 = options.run_transient = options.run_noise = false;
  } else if (stage == 2) {
    options.run_stage1 = false;
  }
  if (epochs1 > 0) options.stage1.max_epochs = epochs1;
  if (epochs2 > 0) options.stage2.max_epochs = epochs2;

  const fs::path out_path(out_model);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());

  stn::VelocityBank bank;
  bank.key_id = key_id;
  for (auto& pv : work) {
    const double f0 = stn::estimate_f0(pv.targets.peaks, b_init);
    const stn::NoteModel init = initial_model(key_id, pv.velocity, f0, b_init, pv.targets.peaks);
    stn::NoteFitResult fit;
    try {
      fit = stn::fit_note(pv.targets, init, options);
    } catch (const stn::DivergenceError& e) {
      throw stn::DivergenceError("stage " + std::to_string(e.stage()) + " at velocity " +
                                     std::to_string(pv.velocity) + ": " + e.what(),
                                 e.stage());
    }
    bank.entries.push_back(fit.model);

    const fs::path hist = out_path.parent_path() /
                          ("fit_history_" + std::to_string(key_id) + "_" +
                           std::to_string(pv.velocity) + ".csv");
    auto csv = open_csv(hist);
    csv << "stage,epoch,learning_rate,train_loss,validation_loss,stft,rms,cent\n";
    for (const auto& r : fit.history) {
      csv << r.stage << "," << r.epoch << "," << fmt_g(r.learning_rate) << ","
          << fmt_g(r.train_loss) << "," << fmt_g(r.validation_loss) << "," << fmt_g(r.stft)
          << "," << fmt_g(r.rms) << "," << fmt_g(r.cent) << "\n";
    }
    note_artifact(hist);
    std::cout << "velocity " << pv.velocity << ": B " << fmt_g(fit.model.inharmonicity)
              << ", cent " << fmt_g(fit.stage1_final_cent) << ", stage2 loss "
              << fmt_g(fit.stage2_final_loss) << "\n";
  }

  std::sort(bank.entries.begin(), bank.entries.end(),
            [](const stn::NoteModel& a, const stn::NoteModel& b) {
              return a.velocity < b.velocity;
            });
  stn::save_bank(bank, out_path);
  note_artifact(out_path);
  return kExitOk;
}

// ----------------------------------------------------------------- render

int run_render(const std::string& model_path, int key_id, int velocity, double duration_s,
               const std::string& out_wav, const stn::RenderOptions& options, bool no_harmonic,
               bool write_components) {
  const stn::VelocityBank bank = load_bank_for(model_path, key_id);
  const stn::NoteModel model = stn::interpolate_velocity(bank, velocity);
  const auto duration = static_cast<std::size_t>(std::llround(duration_s * stn::kModelRate));
  if (duration == 0) {
    std::cerr << "error: duration too short\n";
    return kExitUsage;
  }

  stn::RenderResult r = stn::render_note(model, duration, options);
  if (no_harmonic) std::fill(r.harmonic.samples.begin(), r.harmonic.samples.end(), 0.0);
  const stn::AudioBuffer mixed = float_mix({&r.harmonic, &r.transient, &r.noise});
  const fs::path out_path(out_wav);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  stn::write_wav(out_path, mixed);
  note_artifact(out_path);

  if (write_components) {
    const fs::path stem = out_path.parent_path() / out_path.stem();
    for (const auto& [suffix, buffer] :
         {std::pair{"_harmonic.wav", &r.harmonic}, std::pair{"_transient.wav", &r.transient},
          std::pair{"_noise.wav", &r.noise}}) {
      const fs::path p = stem.string() + suffix;
      stn::write_wav(p, *buffer);
      note_artifact(p);
    }
  }
  std::cout << "rendered " << duration << " samples at " << stn::kModelRate << " Hz, peak "
            << fmt_g(stn::peak_abs(mixed)) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- loss

int run_loss(const std::string& pred_path, const std::string& target_path,
             const std::string& preset, double f0, const std::string& out_csv) {
  const stn::AudioBuffer pred = stn::read_wav(pred_path).audio;
  const stn::AudioBuffer target = stn::read_wav(target_path).audio;
  if (pred.sample_rate != target.sample_rate) {
    throw std::runtime_error("sample rates differ: " + std::to_string(pred.sample_rate) +
                             " vs " + std::to_string(target.sample_rate));
  }

  std::vector<std::size_t> windows;
  if (preset == "harmonic") {
    windows.assign(stn::kHarmonicLossWindows.begin(), stn::kHarmonicLossWindows.end());
  } else if (preset == "transient") {
    windows.assign(stn::kTransientLossWindows.begin(), stn::kTransientLossWindows.end());
  } else if (preset == "noise") {
    windows.assign(stn::kNoiseLossWindows.begin(), stn::kNoiseLossWindows.end());
  } else {
    std::cerr << "error: unknown windows preset: " << preset << "\n";
    return kExitUsage;
  }

  stn::LossReport report = stn::multires_stft_loss(pred, target, windows);
  report.rms = stn::rms_mae_loss(pred, target);
  if (f0 > 0.0) {
    const auto pk_p = stn::estimate_partial_peaks(pred, f0);
    const auto pk_t = stn::estimate_partial_peaks(target, f0);
    std::vector<double> fp, ft;
    for (const auto& p : pk_p) fp.push_back(p.frequency_hz);
    for (const auto& p : pk_t) ft.push_back(p.frequency_hz);
    report.cent = stn::cent_loss(fp, ft);
  }

  const fs::path out_path(out_csv);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  auto csv = open_csv(out_path);
  csv << "metric,window,bin_hz,value\n";
  for (const auto& r : report.per_resolution) {
    csv << "stft_window," << r.window << "," << fmt_g(r.bin_hz) << "," << fmt_g(r.value)
        << "\n";
  }
  csv << "stft,,," << fmt_g(report.stft) << "\n";
  csv << "rms,,," << fmt_g(report.rms) << "\n";
  csv << "cent,,," << fmt_g(report.cent) << "\n";
  csv << "silent_target,,," << (report.silent_target ? 1 : 0) << "\n";
  note_artifact(out_path);
  std::cout << "stft " << fmt_g(report.stft) << ", rms " << fmt_g(report.rms) << ", cent "
            << fmt_g(report.cent) << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- trichord

int run_trichord(const std::string& model_path, const std::vector<std::string>& keys,
                 const std::vector<int>& velocities, double duration_s,
                 const std::string& out_wav, bool normalize,
                 std::optional<std::uint64_t> seed) {
  if (keys.size() != 3 || velocities.size() != 3) {
    std::cerr << "error: exactly three keys and three velocities are required\n";
    return kExitUsage;
  }
  const auto duration = static_cast<std::size_t>(std::llround(duration_s * stn::kModelRate));
  stn::RenderOptions options;
  options.seed_override = seed;

  std::vector<stn::AudioBuffer> notes;
  for (std::size_t i = 0; i < 3; ++i) {
    const int key = parse_key(keys[i]);
    const stn::VelocityBank bank = load_bank_for(model_path, key);
    const stn::NoteModel model = stn::interpolate_velocity(bank, velocities[i]);
    const stn::RenderResult r = stn::render_note(model, duration, options);
    notes.push_back(float_mix({&r.harmonic, &r.transient, &r.noise}));
  }
  stn::AudioBuffer out = float_mix({&notes[0], &notes[1], &notes[2]});

  const double peak = stn::peak_abs(out);
  if (normalize && peak > 0.0) {
    for (double& s : out.samples) s = s / peak * 0.99;
  } else {
    for (double& s : out.samples) s = std::clamp(s, -1.0, 1.0);
  }

  const fs::path out_path(out_wav);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  stn::write_wav(out_path, out);
  note_artifact(out_path);
  std::cout << "uncoupled sum of three notes, pre-clip peak " << fmt_g(peak) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ bench

int run_bench(const std::string& model_path, int key_id, int velocity,
              const std::string& out_csv) {
  const stn::VelocityBank bank = load_bank_for(model_path, key_id);
  const stn::NoteModel model = stn::interpolate_velocity(bank, velocity);
  const std::size_t duration = 10 * stn::kModelRate;

  const auto t0 = std::chrono::steady_clock::now();
  const stn::RenderResult r = stn::render_note(model, duration);
  const auto t1 = std::chrono::steady_clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();
  const double samples_per_second = static_cast<double>(duration) / seconds;
  const double rt_factor = samples_per_second / stn::kModelRate;
  // Keep the render live so the timing cannot be optimized away.
  const double peak = stn::peak_abs(r.mix);

  std::cout << "render wall time " << fmt_g(seconds) << " s\n";
  std::cout << "samples_per_second " << fmt_g(samples_per_second) << "\n";
  std::cout << "real_time_factor " << fmt_g(rt_factor) << "\n";
  std::cout << "partials " << model.partial_count << ", peak " << fmt_g(peak) << "\n";

  if (!out_csv.empty()) {
    const fs::path out_path(out_csv);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    auto csv = open_csv(out_path);
    csv << "metric,value\n";
    csv << "wall_seconds," << fmt_g(seconds) << "\n";
    csv << "samples_per_second," << fmt_g(samples_per_second) << "\n";
    csv << "real_time_factor," << fmt_g(rt_factor) << "\n";
    csv << "partial_count," << model.partial_count << "\n";
    note_artifact(out_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stnsynth: spectral-modeling piano synthesis toolkit"};
  app.require_subcommand(1);

  // analyze
  std::string a_wav, a_out;
  int a_key = 60;
  auto* analyze = app.add_subcommand("analyze", "Measure partials, B and the HPSS split");
  analyze->add_option("wav", a_wav, "Input WAV")->required();
  analyze->add_option("--key", a_key, "MIDI key id")->required();
  analyze->add_option("-o,--out", a_out, "Output directory")->required();

  // fit
  std::string f_dir, f_out;
  int f_key = 60, f_stage = 0, f_epochs1 = 0, f_epochs2 = 0;
  int f_threads = env_threads();
  std::vector<int> f_velocities;
  auto* fit = app.add_subcommand("fit", "Fit a velocity bank from <key>_<velocity>.wav files");
  fit->add_option("wav_dir", f_dir, "Directory of target WAVs")->required();
  fit->add_option("--key", f_key, "MIDI key id")->required();
  fit->add_option("--velocities", f_velocities, "MIDI velocities")->required()->delimiter(',');
  fit->add_option("-o,--out", f_out, "Output bank path (.stn.json)")->required();
  fit->add_option("--stage", f_stage, "Run only stage 1 or 2 (default: all)")
      ->check(CLI::Range(1, 2));
  fit->add_option("--epochs1", f_epochs1, "Stage 1 epoch cap override");
  fit->add_option("--epochs2", f_epochs2, "Stage 2 epoch cap override");
  fit->add_option("--threads", f_threads, "Gradient probe threads (default: STN_THREADS or 1)");

  // render
  std::string r_model, r_out;
  int r_key = 60, r_velocity = 64;
  double r_duration = 10.0;
  bool r_no_phantoms = false, r_no_noise = false, r_no_transient = false, r_no_harmonic = false;
  bool r_components = false;
  std::uint64_t r_seed = 0;
  auto* render = app.add_subcommand("render", "Render a note from a model bank");
  render->add_option("model", r_model, "Bank file or directory of key_<id>.stn.json")
      ->required();
  render->add_option("--key", r_key, "MIDI key id")->required();
  render->add_option("--velocity", r_velocity, "MIDI velocity")->required();
  render->add_option("--duration", r_duration, "Seconds");
  render->add_option("-o,--out", r_out, "Output WAV")->required();
  render->add_flag("--no-phantoms", r_no_phantoms, "Suppress phantom partials");
  render->add_flag("--no-noise", r_no_noise, "Suppress the noise component");
  render->add_flag("--no-transient", r_no_transient, "Suppress the attack transient");
  render->add_flag("--no-harmonic", r_no_harmonic, "Suppress the harmonic component");
  render->add_flag("--components", r_components, "Also write per-component WAVs");
  auto* seed_opt = render->add_option("--seed", r_seed, "Noise seed override");

  // loss
  std::string l_pred, l_target, l_preset = "harmonic", l_out = "loss.csv";
  double l_f0 = 0.0;
  auto* loss = app.add_subcommand("loss", "Compare two WAVs with the training losses");
  loss->add_option("pred", l_pred, "Predicted WAV")->required();
  loss->add_option("target", l_target, "Target WAV")->required();
  loss->add_option("--windows", l_preset, "Preset: harmonic, transient or noise");
  loss->add_option("--f0", l_f0, "Fundamental hint; enables the cent loss");
  loss->add_option("-o,--out", l_out, "Report CSV path");

  // trichord
  std::string t_model, t_out;
  std::vector<std::string> t_keys;
  std::vector<int> t_velocities;
  double t_duration = 10.0;
  bool t_normalize = false;
  std::uint64_t t_seed = 0;
  auto* trichord =
      app.add_subcommand("trichord", "Render three notes and their uncoupled sum");
  trichord->add_option("model", t_model, "Bank file or directory")->required();
  trichord->add_option("--keys", t_keys, "Three keys (MIDI ids or names like G3,A#3,D4)")
      ->required()
      ->delimiter(',');
  trichord->add_option("--velocities", t_velocities, "Three MIDI velocities")
      ->required()
      ->delimiter(',');
  trichord->add_option("--duration", t_duration, "Seconds");
  trichord->add_option("-o,--out", t_out, "Output WAV")->required();
  trichord->add_flag("--normalize", t_normalize, "Peak-normalize instead of clipping");
  auto* t_seed_opt = trichord->add_option("--seed", t_seed, "Noise seed override");

  // bench
  std::string b_model, b_out;
  int b_key = 60, b_velocity = 64;
  auto* bench = app.add_subcommand("bench", "Time a 10 s render and report the RT factor");
  bench->add_option("model", b_model, "Bank file or directory")->required();
  bench->add_option("--key", b_key, "MIDI key id")->required();
  bench->add_option("--velocity", b_velocity, "MIDI velocity");
  bench->add_option("-o,--out", b_out, "Optional CSV report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (analyze->parsed()) {
    return guarded([&] { return run_analyze(a_wav, a_key, a_out); });
  }
  if (fit->parsed()) {
    return guarded([&] {
      return run_fit(f_dir, f_key, f_velocities, f_out, f_stage, f_epochs1, f_epochs2,
                     f_threads);
    });
  }
  if (render->parsed()) {
    return guarded([&] {
      stn::RenderOptions options;
      options.include_phantoms = !r_no_phantoms;
      options.include_noise = !r_no_noise;
      options.include_transient = !r_no_transient;
      if (seed_opt->count() > 0) options.seed_override = r_seed;
      return run_render(r_model, r_key, r_velocity, r_duration, r_out, options, r_no_harmonic,
                        r_components);
    });
  }
  if (loss->parsed()) {
    return guarded([&] { return run_loss(l_pred, l_target, l_preset, l_f0, l_out); });
  }
  if (trichord->parsed()) {
    return guarded([&] {
      std::optional<std::uint64_t> seed;
      if (t_seed_opt->count() > 0) seed = t_seed;
      return run_trichord(t_model, t_keys, t_velocities, t_duration, t_out, t_normalize, seed);
    });
  }
  if (bench->parsed()) {
    return guarded([&] { return run_bench(b_model, b_key, b_velocity, b_out); });
  }
  return kExitUsage;
}
