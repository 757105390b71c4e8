#include "stn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace stn {

double clip_gradient_norm(std::vector<double>& grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

bool adam_step(std::vector<double>& params, std::vector<double> grad, OptimState& state,
               const OptimizerConfig& config, double learning_rate) {
  if (grad.size() != params.size()) {
    throw std::invalid_argument("adam_step: gradient size mismatch");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      ++state.skipped_steps;
      return false;
    }
  }
  if (state.first_moment.empty()) {
    state.first_moment.assign(params.size(), 0.0);
    state.second_moment.assign(params.size(), 0.0);
  }

  clip_gradient_norm(grad, config.grad_clip_norm);
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first_moment[i] = config.beta1 * state.first_moment[i] + (1.0 - config.beta1) * grad[i];
    state.second_moment[i] =
        config.beta2 * state.second_moment[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.first_moment[i] / bias1;
    const double v_hat = state.second_moment[i] / bias2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  return true;
}

std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& loss,
                                const std::vector<double>& params,
                                const OptimizerConfig& config, int threads,
                                std::vector<int>* flagged) {
  const std::size_t n = params.size();
  std::vector<double> grad(n, 0.0);
  std::vector<std::uint8_t> bad(n, 0);

  const auto probe = [&](std::size_t i) {
    const double h =
        std::max(config.fd_relative_step * std::abs(params[i]), config.fd_absolute_step);
    std::vector<double> point = params;
    point[i] = params[i] + h;
    const double up = loss(point);
    point[i] = params[i] - h;
    const double down = loss(point);
    const double g = (up - down) / (2.0 * h);
    if (std::isfinite(g)) {
      grad[i] = g;
    } else {
      bad[i] = 1;
    }
  };

  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) probe(i);
  } else {
    // Coordinates are independent; a static split keeps results identical
    // to the serial order.
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) probe(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (flagged) {
    flagged->clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (bad[i]) flagged->push_back(static_cast<int>(i));
    }
  }
  return grad;
}

PlateauScheduler::PlateauScheduler(const OptimizerConfig& config) : config_(config) {}

bool PlateauScheduler::observe(double validation_loss) {
  if (validation_loss < best_loss_) {
    best_loss_ = validation_loss;
    epochs_since_improvement_ = 0;
    epochs_since_decay_ = 0;
    return true;
  }
  ++epochs_since_improvement_;
  ++epochs_since_decay_;
  if (epochs_since_decay_ >= config_.plateau_patience) {
    ++decay_events_;
    epochs_since_decay_ = 0;
  }
  return false;
}

double PlateauScheduler::learning_rate() const {
  // Recomputed from the event count so the schedule is exactly
  // initial * (1 - decay)^k rather than an accumulated product.
  const double lr =
      config_.learning_rate * std::pow(1.0 - config_.plateau_decay, decay_events_);
  return std::max(lr, config_.min_learning_rate);
}

bool PlateauScheduler::should_stop() const {
  return epochs_since_improvement_ >= config_.early_stop_patience;
}

}  // namespace stn
