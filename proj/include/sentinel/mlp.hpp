#pragma once

// Single-hidden-layer tanh regressor mapping the operating settings to one
// sensor's expected value. Inputs and target are standardised internally.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/linalg.hpp"
#include "sentinel/rng.hpp"
#include "sentinel/training.hpp"

namespace sentinel {

inline constexpr std::size_t kRegressorHidden = 16;

struct RegressorFit {
  std::size_t rows = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double train_loss = 0.0;       // standardised units
  double validation_loss = 0.0;  // standardised units
  double target_variance = 0.0;
  double residual_variance = 0.0;  // after the final output-layer solve, raw units
};

class MlpRegressor {
 public:
  static constexpr std::size_t kInputs = kOpSettings;
  static constexpr std::size_t kHidden = kRegressorHidden;
  static constexpr std::size_t kParameterCount = kHidden * kInputs + kHidden + kHidden + 1;

  MlpRegressor() : params_(kParameterCount, 0.0) {}

  std::array<double, kInputs> input_mean{};
  std::array<double, kInputs> input_scale{1.0, 1.0, 1.0};
  double target_mean = 0.0;
  double target_scale = 1.0;
  RegressorFit fit_stats;

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::span<const double> hidden_weights() const { return {params_.data(), kHidden * kInputs}; }
  std::span<const double> hidden_bias() const { return {params_.data() + kHidden * kInputs, kHidden}; }
  std::span<const double> output_weights() const { return {params_.data() + kHidden * (kInputs + 1), kHidden}; }
  double output_bias() const { return params_.back(); }

  std::array<double, kInputs> standardize(std::span<const double> settings) const {
    std::array<double, kInputs> z{};
    for (std::size_t i = 0; i < kInputs; ++i) z[i] = (settings[i] - input_mean[i]) / input_scale[i];
    return z;
  }

  // Hidden activations for standardised inputs.
  void hidden(const std::array<double, kInputs>& z, std::span<const double> flat, std::span<double> out) const {
    for (std::size_t k = 0; k < kHidden; ++k) {
      double a = flat[kHidden * kInputs + k];
      for (std::size_t i = 0; i < kInputs; ++i) a += flat[k * kInputs + i] * z[i];
      out[k] = std::tanh(a);
    }
  }

  // Prediction in standardised target units.
  double predict_standardized(const std::array<double, kInputs>& z, std::span<const double> flat) const {
    std::array<double, kHidden> h{};
    hidden(z, flat, h);
    double y = flat.back();
    for (std::size_t k = 0; k < kHidden; ++k) y += flat[kHidden * (kInputs + 1) + k] * h[k];
    return y;
  }

  double predict(std::span<const double> settings) const {
    return target_mean + target_scale * predict_standardized(standardize(settings), params_);
  }

  // Squared error in standardised units; gradient added into grad.
  double loss_grad(const std::array<double, kInputs>& z, double target, std::span<const double> flat,
                   std::span<double> grad) const {
    std::array<double, kHidden> h{};
    hidden(z, flat, h);
    double y = flat.back();
    const std::size_t w2 = kHidden * (kInputs + 1);
    for (std::size_t k = 0; k < kHidden; ++k) y += flat[w2 + k] * h[k];
    const double diff = y - target;
    const double dy = 2.0 * diff;
    grad[kParameterCount - 1] += dy;
    for (std::size_t k = 0; k < kHidden; ++k) {
      grad[w2 + k] += dy * h[k];
      const double da = dy * flat[w2 + k] * (1.0 - h[k] * h[k]);
      grad[kHidden * kInputs + k] += da;
      for (std::size_t i = 0; i < kInputs; ++i) grad[k * kInputs + i] += da * z[i];
    }
    return diff * diff;
  }

  friend bool operator==(const MlpRegressor& a, const MlpRegressor& b) {
    return a.params_ == b.params_ && a.input_mean == b.input_mean && a.input_scale == b.input_scale &&
           a.target_mean == b.target_mean && a.target_scale == b.target_scale;
  }

 private:
  std::vector<double> params_;
};

namespace detail {

inline std::pair<double, double> mean_and_scale(std::span<const double> values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double sd = std::sqrt(var);
  // A constant column carries no information; scale 1 maps it to zero.
  return {mean, sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0};
}

}  // namespace detail

/// Fits one regressor: Adam on all weights (minibatch, early stopping on a
/// row hold-out), then an exact least-squares solve for the linear output
/// layer over every row.
inline MlpRegressor fit_mlp_regressor(const std::vector<std::array<double, kOpSettings>>& settings,
                                      std::span<const double> target, const TrainConfig& config) {
  const std::size_t n = settings.size();
  require(n == target.size(), ErrorKind::DimensionMismatch, "settings and target row counts differ");
  require(n >= MlpRegressor::kParameterCount, ErrorKind::InsufficientData,
          "need at least " + std::to_string(MlpRegressor::kParameterCount) + " rows to fit the condition regressor, got " +
              std::to_string(n));
  MlpRegressor model;
  for (std::size_t i = 0; i < kOpSettings; ++i) {
    std::vector<double> column(n);
    for (std::size_t r = 0; r < n; ++r) column[r] = settings[r][i];
    std::tie(model.input_mean[i], model.input_scale[i]) = detail::mean_and_scale(column);
  }
  std::tie(model.target_mean, model.target_scale) = detail::mean_and_scale(target);

  std::vector<std::array<double, kOpSettings>> z(n);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    z[r] = model.standardize(settings[r]);
    y[r] = (target[r] - model.target_mean) / model.target_scale;
  }

  auto& params = model.params();
  Rng rng(config.rng_seed);
  for (std::size_t k = 0; k < MlpRegressor::kHidden * MlpRegressor::kInputs; ++k) {
    params[k] = rng.uniform(-1.0, 1.0) / std::sqrt(static_cast<double>(MlpRegressor::kInputs));
  }
  const std::size_t w2 = MlpRegressor::kHidden * (MlpRegressor::kInputs + 1);
  for (std::size_t k = 0; k < MlpRegressor::kHidden; ++k) {
    params[w2 + k] = rng.uniform(-1.0, 1.0) / std::sqrt(static_cast<double>(MlpRegressor::kHidden));
  }

  const SampleSplit split = split_samples(n, config.validation_frac, config.rng_seed);
  const std::span<const double> live = params;
  SampleLossGrad loss_grad = [&](std::size_t r, std::span<double> grad) {
    return model.loss_grad(z[r], y[r], live, grad);
  };
  SampleLoss loss = [&](std::size_t r) {
    const double d = model.predict_standardized(z[r], live) - y[r];
    return d * d;
  };
  const TrainingHistory history = fit_parameters(params, split, config, loss_grad, loss);

  // Output layer: least squares on [h, 1] with a tiny ridge for conditioning.
  constexpr std::size_t m = MlpRegressor::kHidden + 1;
  std::vector<double> gram(m * m, 0.0);
  std::vector<double> rhs(m, 0.0);
  std::array<double, m> features{};
  for (std::size_t r = 0; r < n; ++r) {
    model.hidden(z[r], params, std::span<double>(features.data(), MlpRegressor::kHidden));
    features[m - 1] = 1.0;
    for (std::size_t a = 0; a < m; ++a) {
      rhs[a] += features[a] * y[r];
      for (std::size_t b = 0; b < m; ++b) gram[a * m + b] += features[a] * features[b];
    }
  }
  for (std::size_t a = 0; a + 1 < m; ++a) gram[a * m + a] += 1e-9 * static_cast<double>(n);
  solve_dense(gram, rhs);
  for (std::size_t k = 0; k < MlpRegressor::kHidden; ++k) params[w2 + k] = rhs[k];
  params.back() = rhs[m - 1];

  RegressorFit stats;
  stats.rows = n;
  stats.epochs = history.stopped_epoch;
  stats.best_epoch = history.best_epoch;
  stats.train_loss = history.epochs.empty() ? 0.0 : history.epochs[history.best_epoch > 0 ? history.best_epoch - 1 : 0].train_loss;
  stats.validation_loss = history.best_validation_loss;
  double mean_t = 0.0;
  for (double t : target) mean_t += t;
  mean_t /= static_cast<double>(n);
  std::vector<double> residual(n);
  double mean_r = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    residual[r] = target[r] - model.predict(settings[r]);
    mean_r += residual[r];
    stats.target_variance += (target[r] - mean_t) * (target[r] - mean_t);
  }
  mean_r /= static_cast<double>(n);
  for (double e : residual) stats.residual_variance += (e - mean_r) * (e - mean_r);
  stats.target_variance /= static_cast<double>(n);
  stats.residual_variance /= static_cast<double>(n);
  model.fit_stats = stats;
  return model;
}

}  // namespace sentinel
