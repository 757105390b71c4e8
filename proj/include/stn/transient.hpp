#pragma once

#include <cstddef>
#include <vector>

#include "stn/audio.hpp"
#include "stn/optimizer.hpp"

namespace stn {

inline constexpr std::size_t kTransientLength = 1300;

/// Attack transient as a fixed-length DCT-II coefficient vector.
struct TransientModel {
  std::vector<double> dct_coeffs;  // length kTransientLength
  double gain = 1.0;
};

/// IDCT of the coefficients scaled by gain in the first 1300 samples,
/// zeros after. total_duration must be >= 1300.
AudioBuffer render_transient(const TransientModel& model, std::size_t total_duration,
                             int sample_rate);

enum class TransientLossDomain { DctCoefficients, TimeDomain };

struct TransientFitOptions {
  TransientLossDomain domain = TransientLossDomain::DctCoefficients;
  int refine_epochs = 8;
};

struct TransientFitResult {
  TransientModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool silent_target = false;
};

/// Initializes the coefficients from dct2 of the target's first 1300
/// samples (zero-padded when shorter) and refines gain plus coarse band
/// gains against the multi-resolution loss (windows 32..256) for a
/// bounded number of epochs. Best iterate wins, so the final loss never
/// exceeds the initial one. A silent target yields a zero model and a
/// warning flag.
TransientFitResult fit_transient(const AudioBuffer& target, const OptimizerConfig& config,
                                 const TransientFitOptions& options = {});

}  // namespace stn
