#pragma once

// Subcommands behind the `sentinel` tool. Each one reads only the config,
// the raw data files and previously persisted artifacts, and returns a
// process exit code.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/model_io.hpp"
#include "sentinel/pipeline.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/version.hpp"

namespace sentinel {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kIo = 2;
inline constexpr int kParse = 3;
inline constexpr int kTraining = 4;
inline constexpr int kMissingArtifact = 5;
inline constexpr int kConfigMismatch = 6;
}  // namespace exit_code

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
      return exit_code::kIo;
    case ErrorKind::MalformedRow:
    case ErrorKind::NonContiguousCycles:
      return exit_code::kParse;
    case ErrorKind::TrainingFailure:
    case ErrorKind::DegenerateSplit:
    case ErrorKind::InsufficientData:
    case ErrorKind::SegmentTooShort:
    case ErrorKind::InsufficientWindows:
    case ErrorKind::InsufficientScores:
      return exit_code::kTraining;
    case ErrorKind::MissingArtifact:
      return exit_code::kMissingArtifact;
    case ErrorKind::ConfigMismatch:
      return exit_code::kConfigMismatch;
    default:
      return exit_code::kUsage;
  }
}

// Command-line values that take precedence over the config file.
struct CliOverrides {
  std::optional<std::string> subset;
  std::optional<double> lambda;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
};

inline std::string read_text_file(const std::filesystem::path& path, ErrorKind missing = ErrorKind::Io) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return buffer.str();
}

// Writes through a temporary sibling so a failed run never leaves a
// truncated artifact behind.
inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline PipelineConfig load_config(const std::filesystem::path& path, const CliOverrides& overrides = {}) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedRow, "config " + path.string() + ": " + e.what());
  }
  if (overrides.subset) j["subset"] = *overrides.subset;
  if (overrides.lambda) j["lambda"] = *overrides.lambda;
  if (overrides.k) j["k"] = *overrides.k;
  if (overrides.seed) j["rng_seed"] = *overrides.seed;
  return config_from_json(j, path.parent_path());
}

// Artifact file names under artifact_dir.
struct ArtifactPaths {
  std::filesystem::path summary, normalizer, model, threshold, report, table;
  std::filesystem::path dir;
  std::string subset;

  std::filesystem::path unit_curve(int unit) const {
    return dir / (subset + "_unit" + std::to_string(unit) + "_errors.csv");
  }
};

inline ArtifactPaths artifact_paths(const PipelineConfig& c) {
  ArtifactPaths p;
  p.dir = c.artifact_dir;
  p.subset = to_string(c.subset);
  p.summary = p.dir / (p.subset + "_summary.json");
  p.normalizer = p.dir / (p.subset + "_normalizer.json");
  p.model = p.dir / (p.subset + "_model.json");
  p.threshold = p.dir / (p.subset + "_threshold.json");
  p.report = p.dir / (p.subset + "_report.json");
  p.table = p.dir / (p.subset + "_table.csv");
  return p;
}

inline FleetDataset load_split(const PipelineConfig& c, SplitKind kind) {
  const auto path = c.data_dir / cmapss_file_name(c.subset, kind);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return parse_cmapss(in, c.subset, kind);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

inline nlohmann::json stats_to_json(const StatsReport& s) {
  nlohmann::json correlation = nlohmann::json::array();
  for (std::size_t r = 0; r < kSensors; ++r) {
    const auto row = s.correlation.row(r);
    correlation.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return nlohmann::json{{"rows", s.rows},
                        {"mean", s.mean},
                        {"variance", s.variance},
                        {"correlation", correlation},
                        {"low_variance_sensors", s.low_variance},
                        {"tolerance", s.tolerance}};
}

inline std::string dump_artifact(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json read_artifact(const std::filesystem::path& path, const std::string& expected_digest) {
  const std::string text = read_text_file(path, ErrorKind::MissingArtifact);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedRow, path.string() + ": " + e.what());
  }
  const auto digest = j.value("config_digest", std::string{});
  require(digest == expected_digest, ErrorKind::ConfigMismatch,
          path.string() + " was produced by config " + digest + ", current config is " + expected_digest);
  return j;
}

inline TrainedArtifacts load_trained(const PipelineConfig& c) {
  const auto paths = artifact_paths(c);
  const auto digest = config_digest(c);
  TrainedArtifacts a;
  a.normalizer = normalizer_from_json(read_artifact(paths.normalizer, digest));
  a.model = model_from_json(read_artifact(paths.model, digest));
  a.threshold = threshold_from_json(read_artifact(paths.threshold, digest));
  return a;
}

inline int cmd_ingest(const PipelineConfig& c, std::ostream& out) {
  const FleetDataset train = load_split(c, SplitKind::Train);
  nlohmann::json summary{{"kind", "dataset_summary"},
                         {"subset", to_string(c.subset)},
                         {"config_digest", config_digest(c)},
                         {"toolkit_version", kToolkitVersion}};
  summary["train"] = dataset_summary(train);
  const auto test_path = c.data_dir / cmapss_file_name(c.subset, SplitKind::Test);
  if (std::filesystem::exists(test_path)) {
    summary["test"] = dataset_summary(load_split(c, SplitKind::Test));
  }
  const auto rows = healthy_rows(train, c.partition);
  summary["healthy_statistics"] = stats_to_json(sensor_statistics(rows));
  const auto paths = artifact_paths(c);
  write_text_file(paths.summary, dump_artifact(summary));
  out << to_string(c.subset) << ": " << train.trajectories.size() << " train units";
  if (summary.contains("test")) out << ", " << summary["test"]["unit_count"].get<std::size_t>() << " test units";
  out << "\nwrote " << paths.summary.string() << '\n';
  return exit_code::kOk;
}

inline int cmd_train(const PipelineConfig& c, std::ostream& out) {
  const auto paths = artifact_paths(c);
  require(std::filesystem::exists(paths.summary), ErrorKind::MissingArtifact,
          "missing " + paths.summary.string() + " (run ingest first)");
  const FleetDataset train = load_split(c, SplitKind::Train);
  const TrainedArtifacts a = train_pipeline(train, c);
  const auto digest = config_digest(c);

  auto normalizer = normalizer_to_json(a.normalizer);
  normalizer["config_digest"] = digest;
  auto model = model_to_json(a.model, c.resolved_train());
  model["config_digest"] = digest;
  auto threshold = threshold_to_json(a.threshold);
  threshold["config_digest"] = digest;
  write_text_file(paths.normalizer, dump_artifact(normalizer));
  write_text_file(paths.model, dump_artifact(model));
  write_text_file(paths.threshold, dump_artifact(threshold));

  const auto& h = a.model.history;
  out << to_string(c.subset) << ": normalization " << to_string(a.normalizer.mode) << ", " << h.train_count
      << " train / " << h.validation_count << " validation windows\n"
      << "stopped after epoch " << h.stopped_epoch << " (" << h.stop_reason << "), best epoch " << h.best_epoch
      << " validation loss " << detail::format_double(h.best_validation_loss) << '\n'
      << "tau " << detail::format_double(a.threshold.tau) << " (mu " << detail::format_double(a.threshold.mu)
      << ", sigma " << detail::format_double(a.threshold.sigma) << ", lambda " << a.threshold.lambda << ")\n";
  for (const auto& w : a.threshold.warnings) out << "warning: " << w << '\n';
  return exit_code::kOk;
}

// Writes one error-curve CSV per unit, or only for `unit` when given.
inline int cmd_detect(const PipelineConfig& c, std::optional<int> unit, std::ostream& out) {
  const TrainedArtifacts a = load_trained(c);
  FleetDataset data = load_split(c, SplitKind::Train);
  if (unit) {
    const Trajectory* found = data.find_unit(*unit);
    require(found != nullptr, ErrorKind::MissingArtifact,
            "unit " + std::to_string(*unit) + " is not present in " + to_string(c.subset));
    Trajectory keep = *found;
    data.trajectories = {std::move(keep)};
  }
  const ThresholdModel threshold = rethreshold(a.threshold, c.lambda, c.k);
  const auto series = detect(score_windows(trajectory_windows(data, a.normalizer, c.window), a.model), threshold, c.k);
  const auto paths = artifact_paths(c);
  std::size_t begin = 0;
  while (begin < series.size()) {
    std::size_t end = begin;
    while (end < series.size() && series[end].unit_id == series[begin].unit_id) ++end;
    const ScoreSeries unit_series(series.begin() + static_cast<std::ptrdiff_t>(begin),
                                  series.begin() + static_cast<std::ptrdiff_t>(end));
    std::ostringstream csv;
    write_error_curve_csv(csv, unit_series, threshold.tau);
    const auto path = paths.unit_curve(unit_series.front().unit_id);
    write_text_file(path, csv.str());
    std::size_t alerts = 0;
    for (const auto& w : unit_series) alerts += w.alert ? 1 : 0;
    out << "unit " << unit_series.front().unit_id << ": " << unit_series.size() << " windows, " << alerts
        << " alerts -> " << path.string() << '\n';
    begin = end;
  }
  return exit_code::kOk;
}

inline int cmd_evaluate(const PipelineConfig& c, std::ostream& out) {
  const TrainedArtifacts a = load_trained(c);
  const FleetDataset data = load_split(c, SplitKind::Train);
  const DetectionReport report = evaluate_pipeline(data, a, c);
  const auto paths = artifact_paths(c);
  write_text_file(paths.report, dump_artifact(report_to_json(report)));
  std::ostringstream csv;
  write_summary_csv(csv, report);
  write_text_file(paths.table, csv.str());
  const auto& m = report.metrics;
  out << report.subset << ": precision " << detail::format_double(m.precision) << ", recall "
      << detail::format_double(m.recall) << ", specificity " << detail::format_double(m.specificity) << ", f1 "
      << detail::format_double(m.f1) << '\n'
      << "wrote " << paths.report.string() << " and " << paths.table.string() << '\n';
  return exit_code::kOk;
}

// Runs `body` and maps any failure to an exit code, with a diagnostic on `err`.
template <typename Body>
int run_guarded(Body&& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed artifact or config: " << e.what() << '\n';
    return exit_code::kParse;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code::kIo;
  }
}

}  // namespace sentinel
