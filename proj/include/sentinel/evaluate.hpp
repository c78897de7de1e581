#pragma once

// 90/10 end-of-life labelling, confusion counts and detection metrics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/autoencoder.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/preprocess.hpp"
#include "sentinel/version.hpp"

namespace sentinel {

// Number of cycles at the end of a life labelled degraded: ceil(frac * L).
inline std::size_t degraded_cycle_count(std::size_t length, double degraded_frac) {
  const double raw = degraded_frac * static_cast<double>(length);
  // Tolerates representation error such as 0.1 * 200 = 20.000000000000004.
  auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::min(count, length);
}

// Last normal cycle of a unit of length L.
inline int normal_boundary(std::size_t length, double degraded_frac) {
  return static_cast<int>(length - degraded_cycle_count(length, degraded_frac));
}

struct WindowLabel {
  int unit_id = 0;
  int last_cycle = 0;
  bool degraded = false;

  friend bool operator==(const WindowLabel&, const WindowLabel&) = default;
};

/// Labels every stride-1 window of every trajectory by its last cycle.
inline std::vector<WindowLabel> label_windows(const FleetDataset& dataset, double degraded_frac, std::size_t window) {
  require(degraded_frac > 0.0 && degraded_frac <= 1.0, ErrorKind::InvalidArgument, "degraded_frac must lie in (0, 1]");
  std::vector<WindowLabel> labels;
  for (const auto& trajectory : dataset.trajectories) {
    const std::size_t length = trajectory.length();
    if (length < window) continue;
    const int boundary = normal_boundary(length, degraded_frac);
    for (std::size_t last = window; last <= length; ++last) {
      labels.push_back({trajectory.unit_id, static_cast<int>(last), static_cast<int>(last) > boundary});
    }
  }
  return labels;
}

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts cross_tabulate(const ScoreSeries& predictions, const std::vector<WindowLabel>& labels) {
  auto key_less = [](const auto& a, const auto& b) {
    return a.unit_id != b.unit_id ? a.unit_id < b.unit_id : a.last_cycle < b.last_cycle;
  };
  ScoreSeries p = predictions;
  std::vector<WindowLabel> l = labels;
  std::sort(p.begin(), p.end(), key_less);
  std::sort(l.begin(), l.end(), key_less);
  require(p.size() == l.size(), ErrorKind::LabelMismatch,
          std::to_string(p.size()) + " predictions but " + std::to_string(l.size()) + " labels");
  ConfusionCounts counts;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].unit_id != l[i].unit_id || p[i].last_cycle != l[i].last_cycle) {
      throw Error(ErrorKind::LabelMismatch, "window (unit " + std::to_string(p[i].unit_id) + ", cycle " +
                                                std::to_string(p[i].last_cycle) + ") has no matching label");
    }
    if (l[i].degraded) {
      ++(p[i].alert ? counts.tp : counts.fn);
    } else {
      ++(p[i].alert ? counts.fp : counts.tn);
    }
  }
  return counts;
}

struct MetricSet {
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double anomaly_share = 0.0;

  friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

// Zero denominators: precision 0, recall 0, specificity 1, f1 0.
inline MetricSet compute_metrics(const ConfusionCounts& c) {
  require(c.total() > 0, ErrorKind::EmptyEvaluation, "no windows were evaluated");
  auto ratio = [](std::size_t num, std::size_t den, double fallback) {
    return den == 0 ? fallback : static_cast<double>(num) / static_cast<double>(den);
  };
  MetricSet m;
  m.precision = ratio(c.tp, c.tp + c.fp, 0.0);
  m.recall = ratio(c.tp, c.tp + c.fn, 0.0);
  m.specificity = ratio(c.tn, c.tn + c.fp, 1.0);
  m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.anomaly_share = ratio(c.tp + c.fn, c.total(), 0.0);
  return m;
}

struct UnitReport {
  int unit_id = 0;
  std::size_t length = 0;
  std::size_t windows = 0;
  std::size_t alerts = 0;
  int degraded_onset = 0;  // first degraded cycle
  std::optional<int> first_alert;
  ConfusionCounts counts;

  // Negative when the first alert precedes the degraded onset.
  std::optional<int> alert_offset() const {
    if (!first_alert) return std::nullopt;
    return *first_alert - degraded_onset;
  }
  std::optional<int> cycles_before_end() const {
    if (!first_alert) return std::nullopt;
    return static_cast<int>(length) - *first_alert;
  }
};

struct DetectionReport {
  std::string subset;
  std::string config_digest;
  std::size_t window = 0;
  double lambda = 0.0;
  std::size_t k = 1;
  double tau = 0.0;
  std::vector<UnitReport> units;
  ConfusionCounts counts;
  MetricSet metrics;
  ScoreSeries series;
};

struct EvaluationOptions {
  std::size_t window = 10;
  std::size_t k = 1;
  PartitionSpec partition;
};

/// Scores every window of every full trajectory, applies the threshold and
/// persistence filter, and cross-tabulates against the end-of-life labels.
inline DetectionReport evaluate_subset(const FleetDataset& dataset, const AutoencoderModel& model,
                                       const Normalizer& normalizer, const ThresholdModel& threshold,
                                       const EvaluationOptions& options) {
  options.partition.validate();
  const auto batch = trajectory_windows(dataset, normalizer, options.window);
  DetectionReport report;
  report.subset = to_string(dataset.subset_id);
  report.window = options.window;
  report.lambda = threshold.lambda;
  report.k = options.k;
  report.tau = threshold.tau;
  report.series = detect(score_windows(batch, model), threshold, options.k);
  const auto labels = label_windows(dataset, options.partition.degraded_frac, options.window);
  report.counts = cross_tabulate(report.series, labels);
  report.metrics = compute_metrics(report.counts);

  std::vector<const Trajectory*> ordered;
  for (const auto& t : dataset.trajectories) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->unit_id < b->unit_id; });
  std::size_t cursor = 0;
  for (const auto* trajectory : ordered) {
    UnitReport unit;
    unit.unit_id = trajectory->unit_id;
    unit.length = trajectory->length();
    const int boundary = normal_boundary(unit.length, options.partition.degraded_frac);
    unit.degraded_onset = boundary + 1;
    while (cursor < report.series.size() && report.series[cursor].unit_id == unit.unit_id) {
      const auto& w = report.series[cursor++];
      ++unit.windows;
      const bool degraded = w.last_cycle > boundary;
      if (w.alert) {
        ++unit.alerts;
        if (!unit.first_alert) unit.first_alert = w.last_cycle;
      }
      if (degraded) {
        ++(w.alert ? unit.counts.tp : unit.counts.fn);
      } else {
        ++(w.alert ? unit.counts.fp : unit.counts.tn);
      }
    }
    report.units.push_back(unit);
  }
  return report;
}

inline nlohmann::json counts_to_json(const ConfusionCounts& c) {
  return nlohmann::json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}, {"total", c.total()}};
}

inline nlohmann::json metrics_to_json(const MetricSet& m) {
  return nlohmann::json{{"precision", m.precision},
                        {"recall", m.recall},
                        {"specificity", m.specificity},
                        {"f1", m.f1},
                        {"anomaly_share", m.anomaly_share}};
}

inline nlohmann::json report_to_json(const DetectionReport& r) {
  using nlohmann::json;
  json units = json::array();
  for (const auto& u : r.units) {
    json entry{{"unit", u.unit_id},
               {"length", u.length},
               {"windows", u.windows},
               {"alerts", u.alerts},
               {"degraded_onset", u.degraded_onset},
               {"counts", counts_to_json(u.counts)}};
    entry["first_alert_cycle"] = u.first_alert ? json(*u.first_alert) : json(nullptr);
    entry["alert_offset"] = u.alert_offset() ? json(*u.alert_offset()) : json(nullptr);
    entry["cycles_before_end"] = u.cycles_before_end() ? json(*u.cycles_before_end()) : json(nullptr);
    units.push_back(std::move(entry));
  }
  return json{{"kind", "detection_report"},
              {"subset", r.subset},
              {"config_digest", r.config_digest},
              {"window", r.window},
              {"lambda", r.lambda},
              {"k", r.k},
              {"tau", r.tau},
              {"units", units},
              {"counts", counts_to_json(r.counts)},
              {"metrics", metrics_to_json(r.metrics)},
              {"anomaly_share", r.metrics.anomaly_share},
              {"toolkit_version", kToolkitVersion}};
}

inline constexpr const char* kSummaryCsvHeader = "dataset,precision,recall,specificity,f1,anomaly_pct,tp,fp,tn,fn,windows";

inline void write_summary_csv(std::ostream& out, const DetectionReport& r) {
  const auto& m = r.metrics;
  const auto& c = r.counts;
  out << kSummaryCsvHeader << '\n'
      << r.subset << ',' << detail::format_double(m.precision) << ',' << detail::format_double(m.recall) << ','
      << detail::format_double(m.specificity) << ',' << detail::format_double(m.f1) << ','
      << detail::format_double(100.0 * m.anomaly_share) << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn
      << ',' << c.total() << '\n';
}

}  // namespace sentinel
