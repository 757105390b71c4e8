#include "stn/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "stn/losses.hpp"

namespace stn {

namespace {

constexpr double kDetuneBoundHz = 1.0;
constexpr double kStage1Penalty = 1e6;  // probe left the feasible band

double squash_detune(double u) { return kDetuneBoundHz * std::tanh(u); }

double unsquash_detune(double detune) {
  const double r = std::clamp(detune / kDetuneBoundHz, -0.999999, 0.999999);
  return std::atanh(r);
}

std::vector<double> peak_frequencies(const std::vector<PeakEstimate>& peaks, int count) {
  std::vector<double> out;
  for (const PeakEstimate& p : peaks) {
    if (p.partial_index >= 1 && p.partial_index <= count) {
      if (out.size() < static_cast<std::size_t>(p.partial_index)) {
        out.resize(p.partial_index, 0.0);
      }
      out[p.partial_index - 1] = p.frequency_hz;
    }
  }
  return out;
}

void check_divergence(double loss, double initial, double factor, int stage) {
  const double limit = factor * std::max(initial, 1e-9);
  if (!std::isfinite(loss) || loss > limit) {
    std::ostringstream msg;
    msg << "stage " << stage << " loss " << loss << " exceeded guard " << limit;
    throw DivergenceError(msg.str(), stage);
  }
}

// FNV-1a over the numeric knobs, so models carry a fingerprint of the
// configuration that produced them.
std::string hash_options(const FitOptions& o) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const OptimizerConfig* c : {&o.stage1, &o.stage2}) {
    mix(c->learning_rate);
    mix(c->plateau_decay);
    mix(static_cast<double>(c->plateau_patience));
    mix(static_cast<double>(c->early_stop_patience));
    mix(c->min_learning_rate);
    mix(static_cast<double>(c->max_epochs));
    mix(c->fd_relative_step);
  }
  mix(o.validation_fraction);
  mix(static_cast<double>(o.include_phantoms));
  mix(static_cast<double>(o.transient_refine_epochs));
  mix(static_cast<double>(o.noise_refine_epochs));
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

struct Stage1Space {
  double b_scale = 1e-4;
  const std::vector<double>* targets = nullptr;
  int count = 0;
  double nyquist = 0.0;

  double inharmonicity(const std::vector<double>& u) const {
    return b_scale * std::max(u[0], 0.0);
  }

  double loss(const std::vector<double>& u) const {
    const double b = inharmonicity(u);
    std::vector<PeakEstimate> peaks(count);
    for (int m = 1; m <= count; ++m) {
      peaks[m - 1].partial_index = m;
      peaks[m - 1].frequency_hz = (*targets)[m - 1];
    }
    const double f0 = estimate_f0(peaks, b);
    if (!(f0 > 0.0) || f0 >= nyquist) return kStage1Penalty;
    const std::vector<double> pred = partial_frequencies(f0, b, count, nyquist);
    if (pred.size() < static_cast<std::size_t>(count)) return kStage1Penalty;
    return cent_loss(pred, *targets, count);
  }
};

// Unit-scale parametrization for stage 2: every optimizer coordinate is
// parameter / scale, so one Adam step moves every physical parameter by
// a comparable relative amount despite the damping coefficients spanning
// twelve orders of magnitude.
struct Stage2Space {
  std::vector<double> scales;  // alpha_v, alpha_h, b0..b3

  static Stage2Space for_model(const NoteModel& init) {
    Stage2Space s;
    for (double a : init.alpha_v) s.scales.push_back(std::max(std::abs(a), 1e-2));
    for (double a : init.alpha_h) s.scales.push_back(std::max(std::abs(a), 1e-2));
    s.scales.push_back(std::max(std::abs(init.damping.b0), 1e-1));
    s.scales.push_back(std::max(std::abs(init.damping.b1), 1e-3));
    s.scales.push_back(std::max(std::abs(init.damping.b2), 1e-12));
    s.scales.push_back(std::max(std::abs(init.damping.b3), 1e-6));
    return s;
  }

  std::vector<double> pack(const NoteModel& m) const {
    std::vector<double> u;
    for (double a : m.alpha_v) u.push_back(a);
    for (double a : m.alpha_h) u.push_back(a);
    u.push_back(m.damping.b0);
    u.push_back(m.damping.b1);
    u.push_back(m.damping.b2);
    u.push_back(m.damping.b3);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] /= scales[i];
    return u;
  }

  void unpack(const std::vector<double>& u, NoteModel& m) const {
    const std::size_t h = m.alpha_v.size();
    for (std::size_t i = 0; i < h; ++i) m.alpha_v[i] = u[i] * scales[i];
    for (std::size_t i = 0; i < h; ++i) m.alpha_h[i] = u[h + i] * scales[h + i];
    m.damping.b0 = std::abs(u[2 * h + 0] * scales[2 * h + 0]);
    m.damping.b1 = std::abs(u[2 * h + 1] * scales[2 * h + 1]);
    m.damping.b2 = std::abs(u[2 * h + 2] * scales[2 * h + 2]);
    m.damping.b3 = std::abs(u[2 * h + 3] * scales[2 * h + 3]);
  }
};

}  // namespace

NoteFitResult fit_note(const FitTargets& targets, const NoteModel& init,
                       const FitOptions& options) {
  validate_note_model(init);
  if (targets.harmonic.samples.empty()) {
    throw std::invalid_argument("fit_note: empty harmonic target");
  }
  const int fs = targets.harmonic.sample_rate;
  if (fs != init.metadata.sample_rate) {
    throw std::invalid_argument("fit_note: target rate does not match the model");
  }
  if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0)) {
    throw std::invalid_argument("fit_note: validation_fraction must be in [0, 1)");
  }

  NoteFitResult result;
  result.model = init;
  NoteModel& model = result.model;
  const double nyquist = 0.5 * fs;

  // ---- Stage 1: inharmonicity (and detune) against the cent loss -----
  if (options.run_stage1 && !targets.peaks.empty()) {
    Stage1Space space;
    space.b_scale = std::max(init.inharmonicity, 1e-6);
    space.nyquist = nyquist;
    const std::vector<double> target_freqs = peak_frequencies(targets.peaks, 6);
    space.count = static_cast<int>(target_freqs.size());
    for (double f : target_freqs) {
      if (!(f > 0.0)) throw std::invalid_argument("fit_note: peaks must cover partials 1..k");
    }
    if (space.count < 2) throw std::invalid_argument("fit_note: need at least two peaks");
    space.targets = &target_freqs;

    std::vector<double> u = {init.inharmonicity / space.b_scale,
                             unsquash_detune(init.detune)};
    auto loss_fn = [&space](const std::vector<double>& p) { return space.loss(p); };

    PlateauScheduler sched(options.stage1);
    OptimState state;
    std::vector<double> best_u = u;
    const double initial = loss_fn(u);
    sched.observe(initial);
    for (int epoch = 1; epoch <= options.stage1.max_epochs; ++epoch) {
      const std::vector<double> grad =
          fd_gradient(loss_fn, u, options.stage1, options.threads);
      adam_step(u, grad, state, options.stage1, sched.learning_rate());
      const double train = loss_fn(u);
      check_divergence(train, initial, options.divergence_factor, 1);
      if (sched.observe(train)) best_u = u;

      EpochRecord rec;
      rec.stage = 1;
      rec.epoch = epoch;
      rec.learning_rate = sched.learning_rate();
      rec.train_loss = train;
      rec.validation_loss = train;
      rec.cent = train;
      result.history.push_back(rec);
      if (sched.should_stop()) break;
    }
    model.inharmonicity = space.inharmonicity(best_u);
    model.detune = squash_detune(best_u[1]);
    std::vector<PeakEstimate> peaks(space.count);
    for (int m = 1; m <= space.count; ++m) {
      peaks[m - 1].partial_index = m;
      peaks[m - 1].frequency_hz = target_freqs[m - 1];
    }
    model.f0 = estimate_f0(peaks, model.inharmonicity);
    result.stage1_final_cent = sched.best_loss();
  }

  // ---- Stage 2: amplitudes and damping against STFT + RMS ------------
  if (options.run_stage2) {
    const std::size_t total = targets.harmonic.samples.size();
    std::size_t train_len =
        total - static_cast<std::size_t>(std::llround(options.validation_fraction * total));
    train_len = std::clamp<std::size_t>(train_len, 1, total);
    const AudioBuffer train_target = slice(targets.harmonic, 0, train_len);
    const AudioBuffer val_target =
        train_len < total ? slice(targets.harmonic, train_len, total) : train_target;

    const Stage2Space space = Stage2Space::for_model(model);
    const std::vector<std::size_t> windows(kHarmonicLossWindows.begin(),
                                           kHarmonicLossWindows.end());

    // Probes may run concurrently, so every evaluation works on its own
    // copy of the model.
    auto render_for = [&](const std::vector<double>& u, std::size_t length) {
      NoteModel probe = model;
      space.unpack(u, probe);
      PolarizationParams p;
      p.f0 = probe.f0;
      p.inharmonicity = probe.inharmonicity;
      p.detune = probe.detune;
      p.alpha_v = probe.alpha_v;
      p.alpha_h = probe.alpha_h;
      return render_harmonic(p, probe.damping, length, fs, options.include_phantoms);
    };
    auto train_loss_fn = [&](const std::vector<double>& u) {
      const AudioBuffer pred = render_for(u, train_len);
      return multires_stft_loss(pred, train_target, windows).stft +
             rms_mae_loss(pred, train_target);
    };

    std::vector<double> u = space.pack(model);
    PlateauScheduler sched(options.stage2);
    OptimState state;
    std::vector<double> best_u = u;

    const AudioBuffer init_full = render_for(u, total);
    const LossReport init_report =
        multires_stft_loss(slice(init_full, 0, train_len), train_target, windows);
    const double init_rms = rms_mae_loss(slice(init_full, 0, train_len), train_target);
    const double initial_train = init_report.stft + init_rms;
    double initial_val = initial_train;
    if (train_len < total) {
      const AudioBuffer val_pred = slice(init_full, train_len, total);
      initial_val = multires_stft_loss(val_pred, val_target, windows).stft +
                    rms_mae_loss(val_pred, val_target);
    }
    sched.observe(initial_val);

    for (int epoch = 1; epoch <= options.stage2.max_epochs; ++epoch) {
      const std::vector<double> grad =
          fd_gradient(train_loss_fn, u, options.stage2, options.threads);
      adam_step(u, grad, state, options.stage2, sched.learning_rate());

      const AudioBuffer full = render_for(u, total);
      const AudioBuffer train_pred = slice(full, 0, train_len);
      const LossReport report = multires_stft_loss(train_pred, train_target, windows);
      const double rms = rms_mae_loss(train_pred, train_target);
      const double train = report.stft + rms;
      check_divergence(train, initial_train, options.divergence_factor, 2);
      double val = train;
      if (train_len < total) {
        const AudioBuffer val_pred = slice(full, train_len, total);
        val = multires_stft_loss(val_pred, val_target, windows).stft +
              rms_mae_loss(val_pred, val_target);
      }
      if (sched.observe(val)) best_u = u;

      EpochRecord rec;
      rec.stage = 2;
      rec.epoch = epoch;
      rec.learning_rate = sched.learning_rate();
      rec.train_loss = train;
      rec.validation_loss = val;
      rec.stft = report.stft;
      rec.rms = rms;
      result.history.push_back(rec);
      if (sched.should_stop()) break;
    }
    space.unpack(best_u, model);
    result.stage2_final_loss = sched.best_loss();
  }

  // ---- Transient and noise components --------------------------------
  if (options.run_transient && !targets.transient.samples.empty()) {
    OptimizerConfig cfg = options.stage2;
    cfg.max_epochs = options.transient_refine_epochs;
    TransientFitOptions topt;
    topt.refine_epochs = options.transient_refine_epochs;
    const TransientFitResult tr = fit_transient(targets.transient, cfg, topt);
    model.transient = tr.model;
    EpochRecord rec;
    rec.stage = 3;
    rec.epoch = options.transient_refine_epochs;
    rec.learning_rate = cfg.learning_rate;
    rec.train_loss = tr.final_loss;
    rec.validation_loss = tr.final_loss;
    result.history.push_back(rec);
  }
  if (options.run_noise && !targets.noise.samples.empty()) {
    OptimizerConfig cfg = options.stage2;
    cfg.max_epochs = options.noise_refine_epochs;
    NoiseFitOptions nopt;
    nopt.refine_epochs = options.noise_refine_epochs;
    nopt.note_id = static_cast<std::uint64_t>(init.key_id);
    const NoiseFitResult nr = fit_noise(targets.noise, cfg, nopt);
    model.noise = nr.model;
    EpochRecord rec;
    rec.stage = 4;
    rec.epoch = options.noise_refine_epochs;
    rec.learning_rate = cfg.learning_rate;
    rec.train_loss = nr.final_loss;
    rec.validation_loss = nr.final_loss;
    result.history.push_back(rec);
  }

  model.metadata.fit_config_hash = hash_options(options);
  validate_note_model(model);
  return result;
}

}  // namespace stn
