#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sentinel/error.hpp"

namespace sentinel {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::size_t step = 0;

  explicit AdamState(std::size_t parameter_count = 0)
      : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0) {}
};

// One bias-corrected Adam update.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const AdamConfig& config) {
  require(params.size() == grads.size() && state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          ErrorKind::DimensionMismatch, "adam_step: parameter, gradient and state sizes differ");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = config.beta1 * m + (1.0 - config.beta1) * grads[i];
    v = config.beta2 * v + (1.0 - config.beta2) * grads[i] * grads[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

inline double l2_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

// Rescales `grads` so its global L2 norm is at most max_norm. Returns the pre-clip norm.
inline double clip_global_norm(std::span<double> grads, double max_norm) {
  const double norm = l2_norm(grads);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace sentinel
