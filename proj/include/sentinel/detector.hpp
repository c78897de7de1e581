#pragma once

// Reconstruction-error scoring, threshold calibration (tau = mu + lambda*sigma)
// and the k-consecutive-window persistence filter.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/autoencoder.hpp"
#include "sentinel/error.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/version.hpp"

namespace sentinel {

// Added to mu when every calibration score is identical.
inline constexpr double kDegenerateSigmaOffset = 1e-9;

struct ThresholdModel {
  double mu = 0.0;
  double sigma = 0.0;
  double lambda = 2.5;
  double tau = 0.0;
  std::size_t k = 5;
  std::size_t calibration_count = 0;
  bool degenerate = false;
  std::vector<std::string> warnings;

  friend bool operator==(const ThresholdModel&, const ThresholdModel&) = default;
};

struct ScoredWindow {
  int unit_id = 0;
  int last_cycle = 0;
  double score = 0.0;
  bool over_threshold = false;
  bool alert = false;

  friend bool operator==(const ScoredWindow&, const ScoredWindow&) = default;
};

using ScoreSeries = std::vector<ScoredWindow>;

/// Scores every window with the model's reconstruction loss. The result is
/// ordered by (unit, last cycle).
inline ScoreSeries score_windows(const WindowBatch& batch, const AutoencoderModel& model) {
  require(batch.windows.size() == batch.origins.size(), ErrorKind::DimensionMismatch,
          "window batch has mismatched origin metadata");
  ScoreSeries series;
  series.reserve(batch.size());
  AutoencoderWorkspace ws;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    series.push_back({batch.origins[i].unit_id, batch.origins[i].last_cycle, forward(batch.windows[i], model, ws)});
  }
  std::stable_sort(series.begin(), series.end(), [](const ScoredWindow& a, const ScoredWindow& b) {
    return a.unit_id != b.unit_id ? a.unit_id < b.unit_id : a.last_cycle < b.last_cycle;
  });
  return series;
}

/// Sample mean and sample (N-1) standard deviation of the calibration scores.
inline ThresholdModel calibrate_threshold(const ScoreSeries& training, double lambda, std::size_t k) {
  require(training.size() >= 2, ErrorKind::InsufficientScores,
          "threshold calibration needs at least 2 scores, got " + std::to_string(training.size()));
  require(k >= 1, ErrorKind::InvalidArgument, "persistence length k must be at least 1");
  require(std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be finite");
  ThresholdModel model;
  model.lambda = lambda;
  model.k = k;
  model.calibration_count = training.size();
  const double n = static_cast<double>(training.size());
  double sum = 0.0;
  for (const auto& w : training) sum += w.score;
  model.mu = sum / n;
  double ss = 0.0;
  for (const auto& w : training) ss += (w.score - model.mu) * (w.score - model.mu);
  model.sigma = std::sqrt(ss / (n - 1.0));
  if (model.sigma == 0.0) {
    model.degenerate = true;
    model.tau = model.mu + kDegenerateSigmaOffset;
    model.warnings.push_back("all calibration scores are identical; tau set to mu + 1e-9");
  } else {
    model.tau = model.mu + lambda * model.sigma;
  }
  return model;
}

// over_threshold = score > tau (strict).
inline ScoreSeries apply_threshold(ScoreSeries series, const ThresholdModel& threshold) {
  for (auto& w : series) w.over_threshold = w.score > threshold.tau;
  return series;
}

// Alert at a window when it and the k-1 windows before it in the same unit
// are all over threshold.
inline ScoreSeries persistence_filter(ScoreSeries series, std::size_t k) {
  require(k >= 1, ErrorKind::InvalidArgument, "persistence length k must be at least 1");
  std::size_t run = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i == 0 || series[i].unit_id != series[i - 1].unit_id) run = 0;
    run = series[i].over_threshold ? run + 1 : 0;
    series[i].alert = run >= k;
  }
  return series;
}

inline ScoreSeries detect(const ScoreSeries& scores, const ThresholdModel& threshold, std::size_t k) {
  return persistence_filter(apply_threshold(scores, threshold), k);
}

inline nlohmann::json threshold_to_json(const ThresholdModel& t) {
  return nlohmann::json{{"kind", "threshold"},
                        {"mu", t.mu},
                        {"sigma", t.sigma},
                        {"lambda", t.lambda},
                        {"tau", t.tau},
                        {"k", t.k},
                        {"calibration_count", t.calibration_count},
                        {"degenerate", t.degenerate},
                        {"warnings", t.warnings},
                        {"toolkit_version", kToolkitVersion}};
}

inline ThresholdModel threshold_from_json(const nlohmann::json& j) {
  ThresholdModel t;
  t.mu = j.at("mu").get<double>();
  t.sigma = j.at("sigma").get<double>();
  t.lambda = j.at("lambda").get<double>();
  t.tau = j.at("tau").get<double>();
  t.k = j.at("k").get<std::size_t>();
  t.calibration_count = j.at("calibration_count").get<std::size_t>();
  t.degenerate = j.at("degenerate").get<bool>();
  t.warnings = j.at("warnings").get<std::vector<std::string>>();
  return t;
}

inline constexpr const char* kErrorCurveHeader = "unit,cycle,score,tau,over_threshold,alert";

// Per-cycle error curve: one row per window, attributed to its last cycle.
inline void write_error_curve_csv(std::ostream& out, const ScoreSeries& series, double tau) {
  out << kErrorCurveHeader << '\n';
  for (const auto& w : series) {
    out << w.unit_id << ',' << w.last_cycle << ',' << detail::format_double(w.score) << ','
        << detail::format_double(tau) << ',' << (w.over_threshold ? 1 : 0) << ',' << (w.alert ? 1 : 0) << '\n';
  }
}

}  // namespace sentinel
