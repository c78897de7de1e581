#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sentinel/detector.hpp"

using namespace sentinel;

namespace {

ScoreSeries series_of(const std::vector<double>& scores, int unit = 1) {
  ScoreSeries s;
  for (std::size_t i = 0; i < scores.size(); ++i) s.push_back({unit, static_cast<int>(i) + 10, scores[i]});
  return s;
}

ScoreSeries flags(const std::vector<bool>& over, int unit = 1) {
  ScoreSeries s;
  for (std::size_t i = 0; i < over.size(); ++i) {
    ScoredWindow w{unit, static_cast<int>(i) + 10, 0.0};
    w.over_threshold = over[i];
    s.push_back(w);
  }
  return s;
}

std::vector<bool> alerts(const ScoreSeries& s) {
  std::vector<bool> out;
  for (const auto& w : s) out.push_back(w.alert);
  return out;
}

}  // namespace

TEST(Calibrate, TauFromMeanAndSampleDeviation) {
  // Sample mean 0.10 and sample standard deviation exactly 0.02.
  const auto t = calibrate_threshold(series_of({0.08, 0.10, 0.12}), 2.5, 5);
  EXPECT_NEAR(t.mu, 0.10, 1e-15);
  EXPECT_NEAR(t.sigma, 0.02, 1e-15);
  EXPECT_NEAR(t.tau, 0.15, 1e-12);
  EXPECT_EQ(t.k, 5u);
  EXPECT_EQ(t.calibration_count, 3u);
  EXPECT_FALSE(t.degenerate);
}

TEST(Calibrate, LambdaZeroGivesMean) {
  const auto t = calibrate_threshold(series_of({1.0, 2.0, 6.0}), 0.0, 1);
  EXPECT_EQ(t.tau, t.mu);
  EXPECT_EQ(t.mu, 3.0);
}

TEST(Calibrate, IdenticalScoresAreDegenerate) {
  const auto t = calibrate_threshold(series_of({0.4, 0.4, 0.4, 0.4}), 2.5, 1);
  EXPECT_TRUE(t.degenerate);
  EXPECT_EQ(t.sigma, 0.0);
  EXPECT_EQ(t.tau, 0.4 + 1e-9);
  EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(Calibrate, NeedsTwoScores) {
  try {
    calibrate_threshold(series_of({0.3}), 2.5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientScores);
  }
}

TEST(Calibrate, TauIdentityOverRandomSamples) {
  Rng rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> scores(2 + rng.index(300));
    for (double& v : scores) v = std::exp(rng.normal(-3.0, 1.0));
    const double lambda = rng.uniform(0.0, 5.0);
    const auto t = calibrate_threshold(series_of(scores), lambda, 1);
    EXPECT_NEAR(t.tau - (t.mu + lambda * t.sigma), 0.0, 1e-12);
    // Independent two-pass sample statistics.
    double mean = 0.0;
    for (double v : scores) mean += v;
    mean /= static_cast<double>(scores.size());
    double ss = 0.0;
    for (double v : scores) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(t.mu, mean, 1e-15);
    EXPECT_NEAR(t.sigma, std::sqrt(ss / static_cast<double>(scores.size() - 1)), 1e-15);
  }
}

TEST(Threshold, StrictInequality) {
  ThresholdModel t;
  t.tau = 0.15;
  const auto s = apply_threshold(series_of({0.15, 0.15 + 1e-15, 0.149}), t);
  EXPECT_FALSE(s[0].over_threshold);
  EXPECT_TRUE(s[1].over_threshold);
  EXPECT_FALSE(s[2].over_threshold);
}

TEST(Threshold, MonotoneScoresGiveSuffix) {
  ThresholdModel t;
  t.tau = 0.5;
  std::vector<double> scores;
  for (int i = 0; i < 40; ++i) scores.push_back(0.03 * i);
  const auto s = apply_threshold(series_of(scores), t);
  bool seen = false;
  for (const auto& w : s) {
    if (seen) {
      EXPECT_TRUE(w.over_threshold);
    }
    seen = seen || w.over_threshold;
  }
  EXPECT_TRUE(seen);
}

TEST(Persistence, FiveConsecutive) {
  EXPECT_EQ(alerts(persistence_filter(flags({true, true, true, true, true}), 5)),
            (std::vector<bool>{false, false, false, false, true}));
}

TEST(Persistence, BrokenRun) {
  EXPECT_EQ(alerts(persistence_filter(flags({true, true, false, true, true}), 3)), std::vector<bool>(5, false));
}

TEST(Persistence, KOneEqualsFlags) {
  const std::vector<bool> f{false, true, true, false, true, false, false, true};
  EXPECT_EQ(alerts(persistence_filter(flags(f), 1)), f);
}

TEST(Persistence, RunsResetAtUnitBoundary) {
  auto s = flags({false, true, true});
  auto second = flags({true, true, true}, 2);
  s.insert(s.end(), second.begin(), second.end());
  const auto out = persistence_filter(s, 3);
  EXPECT_EQ(alerts(out), (std::vector<bool>{false, false, false, false, false, true}));
}

TEST(Persistence, MonotoneInKAndLambda) {
  Rng rng(14);
  ScoreSeries scores;
  for (int u = 1; u <= 6; ++u) {
    for (int c = 10; c < 90; ++c) scores.push_back({u, c, std::abs(rng.normal(0.0, 1.0)) + 0.02 * c});
  }
  const auto base = calibrate_threshold(scores, 1.0, 1);
  std::vector<bool> previous(scores.size(), true);
  for (double lambda : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    ThresholdModel t = base;
    t.tau = base.mu + lambda * base.sigma;
    const auto flagged = apply_threshold(scores, t);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (flagged[i].over_threshold) {
        EXPECT_TRUE(previous[i]);
      }
      previous[i] = flagged[i].over_threshold;
    }
    std::vector<bool> prev_alerts(scores.size(), true);
    for (std::size_t k : {1u, 2u, 3u, 5u, 8u}) {
      const auto a = persistence_filter(flagged, k);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].alert) {
          EXPECT_TRUE(prev_alerts[i]);
        }
        if (k == 1) {
          EXPECT_EQ(a[i].alert, a[i].over_threshold);
        }
        prev_alerts[i] = a[i].alert;
      }
      // The first k-1 windows of each unit can never alert.
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].last_cycle < 10 + static_cast<int>(k) - 1) {
          EXPECT_FALSE(a[i].alert);
        }
      }
    }
  }
}

TEST(Score, PerfectModelScoresZero) {
  AutoencoderModel model(fixtures::tiny_dims());
  WindowBatch batch;
  batch.window_length = 4;
  batch.channels = 3;
  for (int i = 0; i < 3; ++i) {
    batch.windows.emplace_back(3, 4, 0.0);
    batch.origins.push_back({1, 4 + i});
  }
  for (const auto& w : score_windows(batch, model)) EXPECT_EQ(w.score, 0.0);
}

TEST(Score, SameCodePathAsLoss) {
  Rng rng(8);
  AutoencoderModel model(fixtures::tiny_dims());
  model.initialize(3);
  WindowBatch batch;
  batch.window_length = 4;
  batch.channels = 3;
  for (int i = 0; i < 8; ++i) {
    batch.windows.push_back(fixtures::random_window(model.dims(), rng));
    batch.origins.push_back({2 - i % 2, 10 + i});
  }
  const auto scores = score_windows(batch, model);
  for (const auto& s : scores) {
    std::size_t i = 0;
    while (batch.origins[i].unit_id != s.unit_id || batch.origins[i].last_cycle != s.last_cycle) ++i;
    EXPECT_EQ(s.score, reconstruction_loss(batch.windows[i], reconstruct(batch.windows[i], model)));
  }
  for (std::size_t i = 1; i < scores.size(); ++i) {
    EXPECT_TRUE(scores[i - 1].unit_id < scores[i].unit_id ||
                (scores[i - 1].unit_id == scores[i].unit_id && scores[i - 1].last_cycle < scores[i].last_cycle));
  }
}

TEST(ErrorCurve, HeaderAndRows) {
  auto s = detect(series_of({0.1, 0.3}), ThresholdModel{0.0, 0.0, 2.5, 0.2, 1, 2, false, {}}, 1);
  std::ostringstream out;
  write_error_curve_csv(out, s, 0.2);
  EXPECT_EQ(out.str(), "unit,cycle,score,tau,over_threshold,alert\n1,10,0.1,0.2,0,0\n1,11,0.3,0.2,1,1\n");
}

TEST(ThresholdJson, RoundTrip) {
  const auto t = calibrate_threshold(series_of({0.011, 0.0173, 0.009, 0.02}), 2.5, 5);
  EXPECT_EQ(threshold_from_json(nlohmann::json::parse(threshold_to_json(t).dump())), t);
}
