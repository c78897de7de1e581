#pragma once

// Minibatch Adam training with a seeded validation hold-out and early stopping.
// Shared by the autoencoder and the condition regressor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sentinel/adam.hpp"
#include "sentinel/autoencoder.hpp"
#include "sentinel/error.hpp"
#include "sentinel/linalg.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 300;
  std::size_t patience = 10;
  std::size_t batch_size = 64;
  double validation_frac = 0.20;
  std::uint64_t rng_seed = 42;
  // Validation loss must drop by at least this much to count as an improvement.
  double min_improvement = 1e-7;
  double clip_norm = 5.0;

  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }

  void validate() const {
    require(validation_frac > 0.0 && validation_frac < 1.0, ErrorKind::InvalidArgument,
            "validation_frac must lie in (0, 1)");
    require(patience >= 1, ErrorKind::InvalidArgument, "patience must be at least 1");
    require(batch_size >= 1, ErrorKind::InvalidArgument, "batch_size must be at least 1");
    require(max_epochs >= 1, ErrorKind::InvalidArgument, "max_epochs must be at least 1");
    require(learning_rate > 0.0, ErrorKind::InvalidArgument, "learning_rate must be positive");
  }
};

struct SampleSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

inline constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

// floor(frac * n) validation samples (at least one), chosen by a seeded shuffle.
// Both index lists are returned in ascending order.
inline SampleSplit split_samples(std::size_t count, double validation_frac, std::uint64_t seed) {
  require(count >= 2, ErrorKind::InsufficientWindows,
          "need at least 2 samples for a train/validation split, got " + std::to_string(count));
  std::size_t n_val = static_cast<std::size_t>(std::floor(validation_frac * static_cast<double>(count)));
  n_val = std::clamp<std::size_t>(n_val, 1, count - 1);
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed ^ kShuffleStream);
  rng.shuffle(order);
  SampleSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(split.validation.begin(), split.validation.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

// Callbacks used by fit_parameters. `loss_grad(i, grad)` adds sample i's
// gradient into grad and returns its loss; `loss(i)` only evaluates.
using SampleLossGrad = std::function<double(std::size_t, std::span<double>)>;
using SampleLoss = std::function<double(std::size_t)>;

inline double mean_loss(const std::vector<std::size_t>& indices, const SampleLoss& loss) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i : indices) sum += loss(i);
  return sum / static_cast<double>(indices.size());
}

/// Trains `params` in place and leaves them at the best-validation snapshot.
inline TrainingHistory fit_parameters(std::vector<double>& params, const SampleSplit& split, const TrainConfig& config,
                                      const SampleLossGrad& loss_grad, const SampleLoss& loss) {
  config.validate();
  require(!split.train.empty() && !split.validation.empty(), ErrorKind::InsufficientWindows,
          "training and validation sets must both be nonempty");
  TrainingHistory history;
  history.train_count = split.train.size();
  history.validation_count = split.validation.size();

  Rng rng(config.rng_seed ^ kShuffleStream ^ 0xD1B54A32D192ED03ULL);
  AdamState state(params.size());
  const AdamConfig adam = config.adam();
  std::vector<double> grad(params.size());
  std::vector<double> best = params;
  double best_loss = mean_loss(split.validation, loss);
  require(std::isfinite(best_loss), ErrorKind::TrainingFailure, "non-finite initial validation loss");
  history.best_validation_loss = best_loss;
  history.best_epoch = 0;
  history.stop_reason = "max_epochs";

  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) epoch_loss += loss_grad(order[b], grad);
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= inv;
      clip_global_norm(grad, config.clip_norm);
      adam_step(params, grad, state, adam);
    }
    const double train_loss = epoch_loss / static_cast<double>(order.size());
    const double val_loss = mean_loss(split.validation, loss);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw Error(ErrorKind::TrainingFailure, "non-finite loss at epoch " + std::to_string(epoch));
    }
    history.epochs.push_back({epoch, train_loss, val_loss});
    history.stopped_epoch = epoch;
    if (val_loss < best_loss - config.min_improvement) {
      best_loss = val_loss;
      best = params;
      history.best_epoch = epoch;
      history.best_validation_loss = val_loss;
    } else if (epoch - history.best_epoch >= config.patience) {
      history.stop_reason = "early_stopping";
      break;
    }
  }
  std::copy(best.begin(), best.end(), params.begin());
  return history;
}

/// Trains a freshly initialised autoencoder on healthy windows only.
inline AutoencoderModel train_autoencoder(const std::vector<Matrix>& windows, const AutoencoderDims& dims,
                                          const TrainConfig& config) {
  require(windows.size() >= 2, ErrorKind::InsufficientWindows,
          "need at least 2 windows to train, got " + std::to_string(windows.size()));
  AutoencoderModel model(dims);
  model.initialize(config.rng_seed);
  const SampleSplit split = split_samples(windows.size(), config.validation_frac, config.rng_seed);
  AutoencoderWorkspace ws;
  // The callbacks see the model's live parameters through this reference.
  std::vector<double>& params = model.params();
  SampleLossGrad loss_grad = [&](std::size_t i, std::span<double> grad) {
    return accumulate_gradient(windows[i], model, ws, grad);
  };
  SampleLoss loss = [&](std::size_t i) { return forward(windows[i], model, ws); };
  model.history = fit_parameters(params, split, config, loss_grad, loss);
  return model;
}

/// Mean loss over the validation windows the training split would choose;
/// reproduces the recorded best validation loss of a trained model.
inline double validation_loss(const std::vector<Matrix>& windows, const AutoencoderModel& model,
                              const TrainConfig& config) {
  const SampleSplit split = split_samples(windows.size(), config.validation_frac, config.rng_seed);
  AutoencoderWorkspace ws;
  return mean_loss(split.validation, [&](std::size_t i) { return forward(windows[i], model, ws); });
}

}  // namespace sentinel
