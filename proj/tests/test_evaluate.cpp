#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sentinel/evaluate.hpp"
#include "sentinel/pipeline.hpp"

using namespace sentinel;

namespace {

ScoreSeries predictions(const std::vector<bool>& alert) {
  ScoreSeries s;
  for (std::size_t i = 0; i < alert.size(); ++i) {
    ScoredWindow w{1, static_cast<int>(i) + 10, 0.0};
    w.alert = alert[i];
    s.push_back(w);
  }
  return s;
}

std::vector<WindowLabel> labels(const std::vector<bool>& degraded) {
  std::vector<WindowLabel> l;
  for (std::size_t i = 0; i < degraded.size(); ++i) l.push_back({1, static_cast<int>(i) + 10, degraded[i]});
  return l;
}

}  // namespace

TEST(Labels, TwoHundredCycles) {
  EXPECT_EQ(degraded_cycle_count(200, 0.10), 20u);
  EXPECT_EQ(normal_boundary(200, 0.10), 180);
  const auto l = label_windows(fixtures::fleet({200}), 0.10, 1);
  for (const auto& w : l) EXPECT_EQ(w.degraded, w.last_cycle >= 181);
}

TEST(Labels, TenCycles) {
  const auto l = label_windows(fixtures::fleet({10}), 0.10, 1);
  ASSERT_EQ(l.size(), 10u);
  for (const auto& w : l) EXPECT_EQ(w.degraded, w.last_cycle == 10);
}

TEST(Labels, LastCycleRule) {
  const auto l = label_windows(fixtures::fleet({200}), 0.10, 10);
  ASSERT_EQ(l.size(), 191u);
  const auto it = std::find_if(l.begin(), l.end(), [](const WindowLabel& w) { return w.last_cycle == 181; });
  ASSERT_NE(it, l.end());
  EXPECT_TRUE(it->degraded);  // covers cycles 172..181
  EXPECT_FALSE(std::prev(it)->degraded);
}

TEST(Labels, CeilingGivesAtLeastOneDegradedCycle) {
  for (std::size_t length = 10; length < 400; ++length) {
    const auto n = degraded_cycle_count(length, 0.10);
    EXPECT_GE(n, 1u);
    EXPECT_EQ(n, static_cast<std::size_t>(std::ceil(0.10 * static_cast<double>(length) - 1e-9)));
  }
}

TEST(CrossTab, Enumeration) {
  const auto c = cross_tabulate(predictions({true, true, false, true}), labels({true, false, false, true}));
  EXPECT_EQ(c, (ConfusionCounts{2, 1, 1, 0}));
}

TEST(CrossTab, AllAlertsOnAllDegraded) {
  const auto c = cross_tabulate(predictions({true, true, true}), labels({true, true, true}));
  EXPECT_EQ(c.fp + c.tn + c.fn, 0u);
  EXPECT_EQ(c.tp, 3u);
}

TEST(CrossTab, NoAlerts) {
  const auto c = cross_tabulate(predictions({false, false, false, false}), labels({true, false, true, false}));
  EXPECT_EQ(c.tp + c.fp, 0u);
}

TEST(CrossTab, MismatchThrows) {
  try {
    cross_tabulate(predictions({true, false}), labels({true, false, false}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LabelMismatch);
  }
  auto l = labels({true, false});
  l[1].last_cycle = 99;
  EXPECT_THROW(cross_tabulate(predictions({true, false}), l), Error);
}

TEST(Metrics, WorkedExample) {
  const auto m = compute_metrics({2, 8, 90, 0});
  EXPECT_NEAR(m.precision, 0.2, 1e-12);
  EXPECT_NEAR(m.recall, 1.0, 1e-12);
  EXPECT_NEAR(m.specificity, 90.0 / 98.0, 1e-12);
  EXPECT_NEAR(m.f1, 2.0 * 0.2 / 1.2, 1e-12);
  EXPECT_NEAR(m.anomaly_share, 0.02, 1e-12);
}

TEST(Metrics, PerfectDetector) {
  const auto m = compute_metrics({7, 0, 30, 0});
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.specificity, 1.0);
  EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, ZeroDenominatorConventions) {
  const auto m = compute_metrics({0, 0, 5, 4});
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(compute_metrics({3, 0, 0, 0}).specificity, 1.0);
  try {
    compute_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyEvaluation);
  }
}

TEST(Metrics, BoundsOverRandomCounts) {
  Rng rng(10);
  for (int trial = 0; trial < 2000; ++trial) {
    ConfusionCounts c{rng.index(50), rng.index(50), rng.index(50), rng.index(50)};
    if (c.total() == 0) continue;
    const auto m = compute_metrics(c);
    for (double v : {m.precision, m.recall, m.specificity, m.f1, m.anomaly_share}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(m.f1, 2.0 * std::min(m.precision, m.recall) + 1e-15);
  }
}

namespace {

// Scored channels hold a per-unit constant while healthy and jump once the
// final tenth begins; a model whose projection bias is that constant and whose
// projection weights are zero reconstructs healthy windows exactly.
struct ConstructedCase {
  FleetDataset data;
  AutoencoderModel model;
  Normalizer norm;
  ThresholdModel threshold;
};

ConstructedCase constructed_case() {
  ConstructedCase out;
  out.data = fixtures::fleet({60, 80, 100});
  for (auto& t : out.data.trajectories) {
    const int boundary = normal_boundary(t.length(), 0.10);
    for (auto& r : t.records) {
      for (auto& v : r.sensors) v = r.cycle > boundary ? 5.0 : 0.0;
    }
  }
  out.norm.mode = NormalizationMode::MinMax;
  for (auto& s : out.norm.sensors) {
    s.x_min = 0.0;
    s.x_max = 1.0;
  }
  AutoencoderDims dims;
  out.model = AutoencoderModel(dims);
  out.threshold.tau = 1e-12;
  out.threshold.lambda = 2.5;
  return out;
}

}  // namespace

TEST(EvaluateSubset, PerfectOnConstructedFleet) {
  const auto c = constructed_case();
  EvaluationOptions options;
  const auto r = evaluate_subset(c.data, c.model, c.norm, c.threshold, options);
  EXPECT_EQ(r.metrics.recall, 1.0);
  EXPECT_EQ(r.metrics.specificity, 1.0);
  std::size_t windows = 0;
  for (const auto& t : c.data.trajectories) windows += t.length() - 9;
  EXPECT_EQ(r.counts.total(), windows);
  ASSERT_EQ(r.units.size(), 3u);
  for (const auto& u : r.units) {
    ASSERT_TRUE(u.first_alert.has_value());
    EXPECT_EQ(*u.alert_offset(), 0);
    EXPECT_GE(*u.first_alert, 10);
  }
}

TEST(EvaluateSubset, UnitOrderDoesNotMatter) {
  auto c = constructed_case();
  c.model.initialize(5);  // imperfect but deterministic
  ThresholdModel t = c.threshold;
  t.tau = 0.5;
  EvaluationOptions options;
  options.k = 2;
  const auto a = evaluate_subset(c.data, c.model, c.norm, t, options);
  std::reverse(c.data.trajectories.begin(), c.data.trajectories.end());
  const auto b = evaluate_subset(c.data, c.model, c.norm, t, options);
  EXPECT_EQ(a.metrics, b.metrics);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
}

TEST(Report, JsonFieldsAndCsvRow) {
  const auto c = constructed_case();
  auto r = evaluate_subset(c.data, c.model, c.norm, c.threshold, EvaluationOptions{});
  r.config_digest = "0123456789abcdef";
  const auto j = report_to_json(r);
  for (const char* key : {"kind", "subset", "config_digest", "window", "lambda", "k", "tau", "units", "counts",
                          "metrics", "anomaly_share", "toolkit_version"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["counts"]["total"].get<std::size_t>(), r.counts.total());
  EXPECT_TRUE(j["units"][0].contains("alert_offset"));
  std::ostringstream csv;
  write_summary_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_EQ(header, kSummaryCsvHeader);
  EXPECT_EQ(row.rfind("FD001,1,1,1,1,", 0), 0u) << row;
}
