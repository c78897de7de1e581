#pragma once

// Healthy/holdout partitioning, operating-condition normalisation, sensor
// statistics and sliding windows.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/error.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/linalg.hpp"
#include "sentinel/mlp.hpp"
#include "sentinel/training.hpp"
#include "sentinel/version.hpp"

namespace sentinel {

struct PartitionSpec {
  double train_frac = 0.85;
  double degraded_frac = 0.10;

  void validate() const {
    require(train_frac > 0.0 && train_frac <= 1.0, ErrorKind::InvalidArgument, "train_frac must lie in (0, 1]");
    require(degraded_frac > 0.0 && degraded_frac <= 1.0, ErrorKind::InvalidArgument,
            "degraded_frac must lie in (0, 1]");
  }

  friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

inline std::size_t healthy_length(std::size_t length, const PartitionSpec& spec) {
  // Tolerates representation error in e.g. 0.85 * 200.
  return static_cast<std::size_t>(std::floor(spec.train_frac * static_cast<double>(length) + 1e-9));
}

struct TrajectorySegments {
  Trajectory healthy;
  Trajectory holdout;
};

/// Splits a trajectory at floor(train_frac * L). Throws DegenerateSplit if the
/// healthy part cannot hold one window of `window` cycles.
inline TrajectorySegments partition_trajectory(const Trajectory& trajectory, const PartitionSpec& spec,
                                               std::size_t window = 10) {
  spec.validate();
  const std::size_t length = trajectory.length();
  require(length >= 2, ErrorKind::DegenerateSplit,
          "unit " + std::to_string(trajectory.unit_id) + " has fewer than 2 cycles");
  const std::size_t cut = healthy_length(length, spec);
  require(cut >= window, ErrorKind::DegenerateSplit,
          "unit " + std::to_string(trajectory.unit_id) + ": healthy segment of " + std::to_string(cut) +
              " cycles is shorter than the window length " + std::to_string(window));
  TrajectorySegments out;
  out.healthy.unit_id = out.holdout.unit_id = trajectory.unit_id;
  out.healthy.records.assign(trajectory.records.begin(), trajectory.records.begin() + static_cast<std::ptrdiff_t>(cut));
  out.holdout.records.assign(trajectory.records.begin() + static_cast<std::ptrdiff_t>(cut), trajectory.records.end());
  return out;
}

// Rows of the healthy segments of every unit, in unit then cycle order.
inline std::vector<SensorRecord> healthy_rows(const FleetDataset& dataset, const PartitionSpec& spec) {
  spec.validate();
  std::vector<SensorRecord> rows;
  for (const auto& trajectory : dataset.trajectories) {
    const std::size_t cut = healthy_length(trajectory.length(), spec);
    rows.insert(rows.end(), trajectory.records.begin(), trajectory.records.begin() + static_cast<std::ptrdiff_t>(cut));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Condition regressor and normaliser

enum class NormalizationMode { MinMax, Regression };
enum class AuxChannels { Raw, MinMax };

inline std::string to_string(NormalizationMode mode) {
  return mode == NormalizationMode::MinMax ? "minmax" : "regression";
}

inline NormalizationMode parse_normalization_mode(std::string_view text) {
  if (text == "minmax") return NormalizationMode::MinMax;
  if (text == "regression") return NormalizationMode::Regression;
  throw Error(ErrorKind::InvalidArgument, "unknown normalization mode '" + std::string(text) + "'");
}

inline std::string to_string(AuxChannels aux) { return aux == AuxChannels::Raw ? "raw" : "minmax"; }

inline AuxChannels parse_aux_channels(std::string_view text) {
  if (text == "raw") return AuxChannels::Raw;
  if (text == "minmax") return AuxChannels::MinMax;
  throw Error(ErrorKind::InvalidArgument, "unknown auxiliary channel scaling '" + std::string(text) + "'");
}

// Regressor training defaults: one hidden layer of 16 tanh units, Adam with
// the toolkit defaults, at most 200 epochs.
inline TrainConfig default_regressor_config(std::uint64_t seed = 42) {
  TrainConfig config;
  config.max_epochs = 200;
  config.rng_seed = seed;
  return config;
}

inline std::vector<std::array<double, kOpSettings>> settings_of(std::span<const SensorRecord> rows) {
  std::vector<std::array<double, kOpSettings>> settings(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) settings[r] = rows[r].op_settings;
  return settings;
}

inline std::vector<double> sensor_column(std::span<const SensorRecord> rows, std::size_t sensor) {
  std::vector<double> column(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) column[r] = rows[r].sensors[sensor];
  return column;
}

/// Fits the operating-settings -> sensor model for one sensor (0-based index).
inline MlpRegressor fit_condition_regressor(std::span<const SensorRecord> rows, std::size_t sensor_index,
                                            const TrainConfig& config) {
  require(sensor_index < kSensors, ErrorKind::InvalidArgument, "sensor index out of range");
  require(!rows.empty(), ErrorKind::InsufficientData, "no healthy rows to fit the condition regressor");
  const auto target = sensor_column(rows, sensor_index);
  return fit_mlp_regressor(settings_of(rows), target, config);
}

struct SensorScaling {
  // minmax
  double x_min = 0.0;
  double x_max = 0.0;
  // regression
  double residual_mean = 0.0;
  double residual_scale = 1.0;
  // Residual below the sensor's value resolution: the sensor is fully explained
  // by the operating condition and is emitted as 0.
  bool inert = false;

  friend bool operator==(const SensorScaling&, const SensorScaling&) = default;
};

struct Normalizer {
  NormalizationMode mode = NormalizationMode::MinMax;
  AuxChannels aux = AuxChannels::Raw;
  std::array<SensorScaling, kSensors> sensors{};
  std::vector<MlpRegressor> regressors;  // regression mode only, one per sensor
  std::array<double, kOpSettings> setting_min{};
  std::array<double, kOpSettings> setting_max{};
  std::size_t fit_rows = 0;
  std::size_t fit_units = 0;

  friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

inline constexpr double kResidualScaleFloor = 1e-8;

// Smallest positive gap between distinct values; +inf when all values agree.
inline double value_resolution(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double d = values[i] - values[i - 1];
    if (d > 0.0) gap = std::min(gap, d);
  }
  return gap;
}

inline Normalizer fit_normalizer(const FleetDataset& dataset, const PartitionSpec& spec, NormalizationMode mode,
                                 AuxChannels aux = AuxChannels::Raw, std::uint64_t seed = 42) {
  const auto rows = healthy_rows(dataset, spec);
  require(!rows.empty(), ErrorKind::InsufficientData, "no healthy rows to fit the normalizer");
  Normalizer norm;
  norm.mode = mode;
  norm.aux = aux;
  norm.fit_rows = rows.size();
  norm.fit_units = dataset.trajectories.size();

  for (std::size_t i = 0; i < kOpSettings; ++i) {
    norm.setting_min[i] = norm.setting_max[i] = rows.front().op_settings[i];
    for (const auto& r : rows) {
      norm.setting_min[i] = std::min(norm.setting_min[i], r.op_settings[i]);
      norm.setting_max[i] = std::max(norm.setting_max[i], r.op_settings[i]);
    }
  }

  for (std::size_t s = 0; s < kSensors; ++s) {
    const auto column = sensor_column(rows, s);
    auto& scaling = norm.sensors[s];
    scaling.x_min = *std::min_element(column.begin(), column.end());
    scaling.x_max = *std::max_element(column.begin(), column.end());
  }

  if (mode == NormalizationMode::Regression) {
    const auto settings = settings_of(rows);
    norm.regressors.reserve(kSensors);
    for (std::size_t s = 0; s < kSensors; ++s) {
      const auto column = sensor_column(rows, s);
      norm.regressors.push_back(fit_mlp_regressor(settings, column, default_regressor_config(seed + s)));
      const auto& model = norm.regressors.back();
      std::vector<double> residual(rows.size());
      double mean = 0.0;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        residual[r] = column[r] - model.predict(settings[r]);
        mean += residual[r];
      }
      mean /= static_cast<double>(rows.size());
      double var = 0.0;
      for (double e : residual) var += (e - mean) * (e - mean);
      const double sd = rows.size() > 1 ? std::sqrt(var / static_cast<double>(rows.size() - 1)) : 0.0;
      auto& scaling = norm.sensors[s];
      scaling.residual_mean = mean;
      scaling.residual_scale = std::max(sd, kResidualScaleFloor);
      scaling.inert = sd <= 0.5 * value_resolution(column);
    }
  }
  return norm;
}

inline double normalize_minmax(double x, double x_min, double x_max) {
  return x_max > x_min ? (x - x_min) / (x_max - x_min) : 0.0;
}

inline double denormalize_minmax(double z, double x_min, double x_max) { return x_min + z * (x_max - x_min); }

inline double normalize_regression(double x_raw, double y_pred, const SensorScaling& scaling) {
  if (scaling.inert) return 0.0;
  return (x_raw - y_pred - scaling.residual_mean) / scaling.residual_scale;
}

inline double normalize_sensor(const Normalizer& norm, const SensorRecord& record, std::size_t s) {
  const auto& scaling = norm.sensors[s];
  if (norm.mode == NormalizationMode::MinMax) return normalize_minmax(record.sensors[s], scaling.x_min, scaling.x_max);
  return normalize_regression(record.sensors[s], norm.regressors[s].predict(record.op_settings), scaling);
}

// Normalised sensors (rows = cycles, 21 columns) and the auxiliary
// operating-setting channels (rows = cycles, 3 columns) of one trajectory.
struct NormalizedTrajectory {
  int unit_id = 0;
  int first_cycle = 1;
  Matrix sensors;
  Matrix settings;
};

inline NormalizedTrajectory apply_normalizer(const Trajectory& trajectory, const Normalizer& norm) {
  require(norm.mode == NormalizationMode::MinMax || norm.regressors.size() == kSensors, ErrorKind::InvalidArgument,
          "regression normalizer has no fitted regressors");
  NormalizedTrajectory out;
  out.unit_id = trajectory.unit_id;
  out.first_cycle = trajectory.records.empty() ? 1 : trajectory.records.front().cycle;
  const std::size_t length = trajectory.length();
  out.sensors = Matrix(length, kSensors);
  out.settings = Matrix(length, kOpSettings);
  for (std::size_t r = 0; r < length; ++r) {
    const auto& record = trajectory.records[r];
    for (std::size_t s = 0; s < kSensors; ++s) out.sensors(r, s) = normalize_sensor(norm, record, s);
    for (std::size_t i = 0; i < kOpSettings; ++i) {
      out.settings(r, i) = norm.aux == AuxChannels::Raw
                               ? record.op_settings[i]
                               : normalize_minmax(record.op_settings[i], norm.setting_min[i], norm.setting_max[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exploratory statistics

struct StatsReport {
  std::size_t rows = 0;
  std::array<double, kSensors> mean{};
  std::array<double, kSensors> variance{};  // sample (N-1) variance
  Matrix correlation{kSensors, kSensors};
  std::vector<int> low_variance;  // 1-based sensor numbers
  double tolerance = 0.0;
};

inline constexpr double kLowVarianceTolerance = 1e-4;

inline StatsReport sensor_statistics(std::span<const SensorRecord> rows, double tolerance = kLowVarianceTolerance) {
  require(!rows.empty(), ErrorKind::InsufficientData, "sensor statistics need at least one row");
  StatsReport report;
  report.rows = rows.size();
  report.tolerance = tolerance;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t s = 0; s < kSensors; ++s) report.mean[s] += r.sensors[s];
  }
  for (auto& m : report.mean) m /= n;
  // A column with a single repeated value has exactly zero spread.
  std::array<bool, kSensors> constant{};
  for (std::size_t s = 0; s < kSensors; ++s) {
    constant[s] = std::all_of(rows.begin(), rows.end(), [&](const SensorRecord& r) {
      return r.sensors[s] == rows.front().sensors[s];
    });
  }
  Matrix cov(kSensors, kSensors);
  for (const auto& r : rows) {
    for (std::size_t a = 0; a < kSensors; ++a) {
      if (constant[a]) continue;
      const double da = r.sensors[a] - report.mean[a];
      for (std::size_t b = a; b < kSensors; ++b) {
        if (!constant[b]) cov(a, b) += da * (r.sensors[b] - report.mean[b]);
      }
    }
  }
  const double denom = rows.size() > 1 ? n - 1.0 : 1.0;
  for (std::size_t a = 0; a < kSensors; ++a) {
    for (std::size_t b = a; b < kSensors; ++b) cov(b, a) = cov(a, b) = cov(a, b) / denom;
  }
  for (std::size_t a = 0; a < kSensors; ++a) {
    report.variance[a] = cov(a, a);
    if (report.variance[a] < tolerance) report.low_variance.push_back(static_cast<int>(a) + 1);
  }
  for (std::size_t a = 0; a < kSensors; ++a) {
    for (std::size_t b = 0; b < kSensors; ++b) {
      const double va = cov(a, a);
      const double vb = cov(b, b);
      // Undefined for a zero-variance sensor; reported as 0.
      report.correlation(a, b) = (va > 0.0 && vb > 0.0) ? std::clamp(cov(a, b) / std::sqrt(va * vb), -1.0, 1.0) : 0.0;
    }
    if (cov(a, a) > 0.0) report.correlation(a, a) = 1.0;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Sliding windows

struct WindowOrigin {
  int unit_id = 0;
  int last_cycle = 0;

  friend bool operator==(const WindowOrigin&, const WindowOrigin&) = default;
  friend auto operator<=>(const WindowOrigin&, const WindowOrigin&) = default;
};

// Each window is (channels x timesteps): 21 normalised sensors, then the 3
// operating-setting channels.
struct WindowBatch {
  std::size_t window_length = 0;
  std::size_t channels = kSensors + kOpSettings;
  std::vector<Matrix> windows;
  std::vector<WindowOrigin> origins;

  std::size_t size() const { return windows.size(); }

  void append(WindowBatch&& other) {
    require(windows.empty() || other.windows.empty() || other.window_length == window_length,
            ErrorKind::DimensionMismatch, "cannot merge window batches of different lengths");
    if (windows.empty()) window_length = other.window_length;
    for (auto& w : other.windows) windows.push_back(std::move(w));
    origins.insert(origins.end(), other.origins.begin(), other.origins.end());
  }
};

inline std::size_t window_count(std::size_t length, std::size_t window, std::size_t stride) {
  return length < window ? 0 : (length - window) / stride + 1;
}

/// Windows over rows [begin, end) of a normalised trajectory.
inline WindowBatch make_windows(const NormalizedTrajectory& segment, std::size_t window, std::size_t stride = 1,
                                std::size_t begin = 0, std::size_t end = std::numeric_limits<std::size_t>::max()) {
  require(window >= 1 && stride >= 1, ErrorKind::InvalidArgument, "window and stride must be positive");
  end = std::min(end, segment.sensors.rows());
  const std::size_t length = end > begin ? end - begin : 0;
  require(length >= window, ErrorKind::SegmentTooShort,
          "unit " + std::to_string(segment.unit_id) + ": segment of " + std::to_string(length) +
              " cycles is shorter than the window length " + std::to_string(window));
  WindowBatch batch;
  batch.window_length = window;
  const std::size_t count = window_count(length, window, stride);
  batch.windows.reserve(count);
  batch.origins.reserve(count);
  for (std::size_t start = begin; start + window <= end; start += stride) {
    Matrix m(kSensors + kOpSettings, window);
    for (std::size_t t = 0; t < window; ++t) {
      for (std::size_t s = 0; s < kSensors; ++s) m(s, t) = segment.sensors(start + t, s);
      for (std::size_t i = 0; i < kOpSettings; ++i) m(kSensors + i, t) = segment.settings(start + t, i);
    }
    batch.windows.push_back(std::move(m));
    batch.origins.push_back({segment.unit_id, segment.first_cycle + static_cast<int>(start + window) - 1});
  }
  return batch;
}

// Windows inside every unit's healthy segment.
inline WindowBatch healthy_windows(const FleetDataset& dataset, const Normalizer& norm, const PartitionSpec& spec,
                                   std::size_t window, std::size_t stride = 1) {
  WindowBatch batch;
  batch.window_length = window;
  for (const auto& trajectory : dataset.trajectories) {
    const auto parts = partition_trajectory(trajectory, spec, window);
    batch.append(make_windows(apply_normalizer(parts.healthy, norm), window, stride));
  }
  return batch;
}

// Windows over every full trajectory.
inline WindowBatch trajectory_windows(const FleetDataset& dataset, const Normalizer& norm, std::size_t window,
                                      std::size_t stride = 1) {
  WindowBatch batch;
  batch.window_length = window;
  for (const auto& trajectory : dataset.trajectories) {
    if (trajectory.length() < window) continue;
    batch.append(make_windows(apply_normalizer(trajectory, norm), window, stride));
  }
  return batch;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json regressor_to_json(const MlpRegressor& m) {
  using nlohmann::json;
  json hidden_weights = json::array();
  const auto w1 = m.hidden_weights();
  for (std::size_t k = 0; k < MlpRegressor::kHidden; ++k) {
    hidden_weights.push_back(std::vector<double>(w1.begin() + static_cast<std::ptrdiff_t>(k * MlpRegressor::kInputs),
                                                 w1.begin() + static_cast<std::ptrdiff_t>((k + 1) * MlpRegressor::kInputs)));
  }
  const auto b1 = m.hidden_bias();
  const auto w2 = m.output_weights();
  return json{{"input_mean", m.input_mean},
              {"input_scale", m.input_scale},
              {"target_mean", m.target_mean},
              {"target_scale", m.target_scale},
              {"hidden_weights", hidden_weights},
              {"hidden_bias", std::vector<double>(b1.begin(), b1.end())},
              {"output_weights", std::vector<double>(w2.begin(), w2.end())},
              {"output_bias", m.output_bias()},
              {"fit",
               {{"rows", m.fit_stats.rows},
                {"epochs", m.fit_stats.epochs},
                {"best_epoch", m.fit_stats.best_epoch},
                {"train_loss", m.fit_stats.train_loss},
                {"validation_loss", m.fit_stats.validation_loss},
                {"target_variance", m.fit_stats.target_variance},
                {"residual_variance", m.fit_stats.residual_variance}}}};
}

inline MlpRegressor regressor_from_json(const nlohmann::json& j) {
  MlpRegressor m;
  m.input_mean = j.at("input_mean").get<std::array<double, kOpSettings>>();
  m.input_scale = j.at("input_scale").get<std::array<double, kOpSettings>>();
  m.target_mean = j.at("target_mean").get<double>();
  m.target_scale = j.at("target_scale").get<double>();
  auto& p = m.params();
  const auto& hw = j.at("hidden_weights");
  require(hw.size() == MlpRegressor::kHidden, ErrorKind::DimensionMismatch, "regressor hidden_weights shape");
  for (std::size_t k = 0; k < MlpRegressor::kHidden; ++k) {
    const auto row = hw[k].get<std::vector<double>>();
    require(row.size() == MlpRegressor::kInputs, ErrorKind::DimensionMismatch, "regressor hidden_weights shape");
    std::copy(row.begin(), row.end(), p.begin() + static_cast<std::ptrdiff_t>(k * MlpRegressor::kInputs));
  }
  const auto b1 = j.at("hidden_bias").get<std::vector<double>>();
  const auto w2 = j.at("output_weights").get<std::vector<double>>();
  require(b1.size() == MlpRegressor::kHidden && w2.size() == MlpRegressor::kHidden, ErrorKind::DimensionMismatch,
          "regressor layer shape");
  std::copy(b1.begin(), b1.end(), p.begin() + static_cast<std::ptrdiff_t>(MlpRegressor::kHidden * MlpRegressor::kInputs));
  std::copy(w2.begin(), w2.end(),
            p.begin() + static_cast<std::ptrdiff_t>(MlpRegressor::kHidden * (MlpRegressor::kInputs + 1)));
  p.back() = j.at("output_bias").get<double>();
  const auto& fit = j.at("fit");
  m.fit_stats.rows = fit.at("rows").get<std::size_t>();
  m.fit_stats.epochs = fit.at("epochs").get<std::size_t>();
  m.fit_stats.best_epoch = fit.at("best_epoch").get<std::size_t>();
  m.fit_stats.train_loss = fit.at("train_loss").get<double>();
  m.fit_stats.validation_loss = fit.at("validation_loss").get<double>();
  m.fit_stats.target_variance = fit.at("target_variance").get<double>();
  m.fit_stats.residual_variance = fit.at("residual_variance").get<double>();
  return m;
}

inline nlohmann::json normalizer_to_json(const Normalizer& norm) {
  using nlohmann::json;
  json sensors = json::array();
  for (std::size_t s = 0; s < kSensors; ++s) {
    const auto& sc = norm.sensors[s];
    json entry{{"sensor", s + 1}, {"x_min", sc.x_min}, {"x_max", sc.x_max}};
    if (norm.mode == NormalizationMode::Regression) {
      entry["residual_mean"] = sc.residual_mean;
      entry["residual_scale"] = sc.residual_scale;
      entry["inert"] = sc.inert;
      entry["regressor"] = regressor_to_json(norm.regressors[s]);
    }
    sensors.push_back(std::move(entry));
  }
  return json{{"kind", "normalizer"},
              {"mode", to_string(norm.mode)},
              {"aux_channels", to_string(norm.aux)},
              {"setting_min", norm.setting_min},
              {"setting_max", norm.setting_max},
              {"sensors", sensors},
              {"fit", {{"rows", norm.fit_rows}, {"units", norm.fit_units}}},
              {"toolkit_version", kToolkitVersion}};
}

inline Normalizer normalizer_from_json(const nlohmann::json& j) {
  Normalizer norm;
  norm.mode = parse_normalization_mode(j.at("mode").get<std::string>());
  norm.aux = parse_aux_channels(j.at("aux_channels").get<std::string>());
  norm.setting_min = j.at("setting_min").get<std::array<double, kOpSettings>>();
  norm.setting_max = j.at("setting_max").get<std::array<double, kOpSettings>>();
  const auto& sensors = j.at("sensors");
  require(sensors.size() == kSensors, ErrorKind::DimensionMismatch, "normalizer must describe 21 sensors");
  for (std::size_t s = 0; s < kSensors; ++s) {
    const auto& e = sensors[s];
    auto& sc = norm.sensors[s];
    sc.x_min = e.at("x_min").get<double>();
    sc.x_max = e.at("x_max").get<double>();
    if (norm.mode == NormalizationMode::Regression) {
      sc.residual_mean = e.at("residual_mean").get<double>();
      sc.residual_scale = e.at("residual_scale").get<double>();
      sc.inert = e.at("inert").get<bool>();
      norm.regressors.push_back(regressor_from_json(e.at("regressor")));
    }
  }
  norm.fit_rows = j.at("fit").at("rows").get<std::size_t>();
  norm.fit_units = j.at("fit").at("units").get<std::size_t>();
  return norm;
}

}  // namespace sentinel
