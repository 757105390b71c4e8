#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace stn {

struct OptimizerConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip_norm = 1.0;       // gradients rescaled to this L2 norm when larger
  double plateau_decay = 0.25;       // lr multiplied by (1 - plateau_decay) per event
  int plateau_patience = 1;          // epochs without improvement before a decay event
  int early_stop_patience = 50;      // epochs without improvement before stopping
  double min_learning_rate = 1e-6;
  int max_epochs = 200;
  double fd_relative_step = 1e-4;
  double fd_absolute_step = 1e-7;
  std::uint64_t seed = 0;
};

/// Adam state. Moment vectors are sized on first use.
struct OptimState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  long step_count = 0;
  int skipped_steps = 0;
};

/// Scales grad down to L2 norm max_norm when it is larger. Returns the
/// pre-clip norm.
double clip_gradient_norm(std::vector<double>& grad, double max_norm);

/// One Adam update with bias correction, in place. Returns false (and
/// counts a skipped step) when the gradient has a non-finite entry.
/// Gradient clipping is applied internally.
bool adam_step(std::vector<double>& params, std::vector<double> grad, OptimState& state,
               const OptimizerConfig& config, double learning_rate);

/// Central-difference gradient, h_i = max(fd_relative_step * |p_i|,
/// fd_absolute_step). A non-finite probe zeroes that coordinate and
/// records its index in flagged (when given). Probes are independent, so
/// threads > 1 splits coordinates across workers with identical results.
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                const std::vector<double>& params,
                                const OptimizerConfig& config, int threads = 1,
                                std::vector<int>* flagged = nullptr);

/// Plateau learning-rate schedule with best-iterate bookkeeping.
/// After k decay events the rate is exactly initial * (1 - decay)^k,
/// floored at min_learning_rate.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(const OptimizerConfig& config);

  /// Records one epoch's validation loss. Returns true when it improved
  /// on the best seen so far.
  bool observe(double validation_loss);

  double learning_rate() const;
  double best_loss() const { return best_loss_; }
  int epochs_since_improvement() const { return epochs_since_improvement_; }
  int decay_events() const { return decay_events_; }
  bool should_stop() const;

 private:
  OptimizerConfig config_;
  double best_loss_ = std::numeric_limits<double>::infinity();
  int epochs_since_improvement_ = 0;
  int epochs_since_decay_ = 0;
  int decay_events_ = 0;
};

}  // namespace stn
