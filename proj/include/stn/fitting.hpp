#pragma once

#include <stdexcept>
#include <vector>

#include "stn/analysis.hpp"
#include "stn/model.hpp"
#include "stn/optimizer.hpp"

namespace stn {

/// A fit stage's loss exploded past the divergence guard.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int stage)
      : std::runtime_error(what), stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

struct FitOptions {
  OptimizerConfig stage1;  // B and detune vs cent loss
  OptimizerConfig stage2;  // alpha_v, alpha_h, b0..b3 vs STFT + RMS loss
  bool run_stage1 = true;
  bool run_stage2 = true;
  bool run_transient = true;
  bool run_noise = true;
  bool include_phantoms = true;
  double validation_fraction = 0.2;  // final portion of the note held out
  int transient_refine_epochs = 8;
  int noise_refine_epochs = 8;
  int threads = 1;
  double divergence_factor = 1e3;

  FitOptions() {
    stage1.max_epochs = 1500;
    // Stage 2 re-renders the full note for every finite-difference probe, so
    // its epochs dominate the wall time; 12 keeps a 4 s note under ten
    // minutes single-threaded while the damping refinement still converges.
    stage2.max_epochs = 12;
  }
};

struct EpochRecord {
  int stage = 0;  // 1, 2, 3 = transient, 4 = noise
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double stft = 0.0;
  double rms = 0.0;
  double cent = 0.0;
};

struct NoteFitResult {
  NoteModel model;
  std::vector<EpochRecord> history;
  double stage1_final_cent = 0.0;
  double stage2_final_loss = 0.0;
};

/// Two-stage per-note fit against analysis targets, then transient and
/// noise fits. Stage 1 tunes B (and detune) against the cent loss on the
/// first 6 predicted vs measured partials; stage 2 tunes the amplitude
/// vectors and damping coefficients against the multi-resolution STFT
/// plus RMS losses on the harmonic target. Plateau decay and early
/// stopping are driven by the validation segment (final 20%); the best
/// iterate per stage is kept, so stage losses never increase.
NoteFitResult fit_note(const FitTargets& targets, const NoteModel& init,
                       const FitOptions& options = {});

}  // namespace stn
