#pragma once

// End-to-end pipeline: configuration, training (normaliser -> autoencoder ->
// threshold) and evaluation, independent of any file layout.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/autoencoder.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/model_io.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/training.hpp"

namespace sentinel {

struct PipelineConfig {
  std::filesystem::path data_dir = ".";
  std::filesystem::path artifact_dir = "artifacts";
  SubsetId subset = SubsetId::FD001;
  PartitionSpec partition;
  // Empty means: regression for multi-regime subsets, min-max otherwise.
  std::optional<NormalizationMode> normalization;
  AuxChannels aux = AuxChannels::Raw;
  std::size_t window = 10;
  std::size_t stride = 1;
  std::vector<std::size_t> encoder_hidden{16, 8, 4};
  TrainConfig train;
  double lambda = 2.5;
  std::size_t k = 1;
  std::uint64_t rng_seed = 42;

  NormalizationMode resolved_normalization() const {
    if (normalization) return *normalization;
    return is_multi_regime(subset) ? NormalizationMode::Regression : NormalizationMode::MinMax;
  }

  TrainConfig resolved_train() const {
    TrainConfig c = train;
    c.rng_seed = rng_seed;
    return c;
  }

  AutoencoderDims dims() const {
    AutoencoderDims d;
    d.input_channels = kSensors + kOpSettings;
    d.scored_channels = kSensors;
    d.window = window;
    d.encoder_hidden = encoder_hidden;
    return d;
  }

  void validate() const {
    partition.validate();
    resolved_train().validate();
    require(window >= 1, ErrorKind::InvalidArgument, "window must be at least 1");
    require(stride >= 1, ErrorKind::InvalidArgument, "stride must be at least 1");
    require(!encoder_hidden.empty(), ErrorKind::InvalidArgument, "encoder_hidden must not be empty");
    require(k >= 1, ErrorKind::InvalidArgument, "k must be at least 1");
    require(std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be finite");
  }
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "data_dir",   "artifact_dir",  "subset",         "train_frac",    "degraded_frac", "normalization",
      "aux_channels", "window",      "stride",         "encoder_hidden", "learning_rate", "beta1",
      "beta2",      "epsilon",       "max_epochs",     "patience",      "batch_size",    "validation_frac",
      "min_improvement", "clip_norm", "lambda",        "k",             "rng_seed"};
  return keys;
}

// Relative paths are resolved against `base_dir` (the config file's directory).
inline PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  require(j.is_object(), ErrorKind::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& k : config_keys()) known = known || k == key;
    require(known, ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  }
  PipelineConfig c;
  auto path_of = [&](const char* key, const std::filesystem::path& fallback) {
    if (!j.contains(key)) return fallback;
    std::filesystem::path p = j.at(key).get<std::string>();
    return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  };
  c.data_dir = path_of("data_dir", base_dir.empty() ? c.data_dir : base_dir);
  c.artifact_dir = path_of("artifact_dir", base_dir.empty() ? c.artifact_dir : base_dir / c.artifact_dir);
  if (j.contains("subset")) c.subset = parse_subset_id(j.at("subset").get<std::string>());
  c.partition.train_frac = j.value("train_frac", c.partition.train_frac);
  c.partition.degraded_frac = j.value("degraded_frac", c.partition.degraded_frac);
  if (j.contains("normalization")) {
    const auto mode = j.at("normalization").get<std::string>();
    if (mode != "auto") c.normalization = parse_normalization_mode(mode);
  }
  if (j.contains("aux_channels")) c.aux = parse_aux_channels(j.at("aux_channels").get<std::string>());
  c.window = j.value("window", c.window);
  c.stride = j.value("stride", c.stride);
  c.encoder_hidden = j.value("encoder_hidden", c.encoder_hidden);
  train_config_from_json(j, c.train);
  c.lambda = j.value("lambda", c.lambda);
  c.k = j.value("k", c.k);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  c.validate();
  return c;
}

// Every setting that shapes the trained artifacts. lambda and k are
// detection-time knobs and are reported separately.
inline nlohmann::json model_config_json(const PipelineConfig& c) {
  nlohmann::json j = train_config_to_json(c.resolved_train());
  j["subset"] = to_string(c.subset);
  j["train_frac"] = c.partition.train_frac;
  j["degraded_frac"] = c.partition.degraded_frac;
  j["normalization"] = to_string(c.resolved_normalization());
  j["aux_channels"] = to_string(c.aux);
  j["window"] = c.window;
  j["stride"] = c.stride;
  j["encoder_hidden"] = c.encoder_hidden;
  return j;
}

// FNV-1a 64 over the canonical (sorted-key, compact) JSON text.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

inline std::string config_digest(const PipelineConfig& c) { return fnv1a_hex(model_config_json(c).dump()); }

struct TrainedArtifacts {
  Normalizer normalizer;
  AutoencoderModel model;
  ThresholdModel threshold;
  ScoreSeries calibration_scores;
};

/// Fits the normaliser on healthy rows, trains the autoencoder on healthy
/// windows and calibrates the threshold on the scores of those same windows.
inline TrainedArtifacts train_pipeline(const FleetDataset& dataset, const PipelineConfig& config) {
  config.validate();
  TrainedArtifacts out;
  out.normalizer =
      fit_normalizer(dataset, config.partition, config.resolved_normalization(), config.aux, config.rng_seed);
  const WindowBatch healthy = healthy_windows(dataset, out.normalizer, config.partition, config.window, config.stride);
  out.model = train_autoencoder(healthy.windows, config.dims(), config.resolved_train());
  out.calibration_scores = score_windows(healthy, out.model);
  out.threshold = calibrate_threshold(out.calibration_scores, config.lambda, config.k);
  return out;
}

// Same mu/sigma with a different multiplier or persistence length.
inline ThresholdModel rethreshold(const ThresholdModel& base, double lambda, std::size_t k) {
  ThresholdModel t = base;
  t.lambda = lambda;
  t.k = k;
  t.tau = t.degenerate ? t.mu + kDegenerateSigmaOffset : t.mu + lambda * t.sigma;
  return t;
}

inline DetectionReport evaluate_pipeline(const FleetDataset& dataset, const TrainedArtifacts& artifacts,
                                         const PipelineConfig& config) {
  EvaluationOptions options;
  options.window = config.window;
  options.k = config.k;
  options.partition = config.partition;
  const ThresholdModel threshold = rethreshold(artifacts.threshold, config.lambda, config.k);
  DetectionReport report = evaluate_subset(dataset, artifacts.model, artifacts.normalizer, threshold, options);
  report.config_digest = config_digest(config);
  return report;
}

}  // namespace sentinel
