#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sentinel/ingest.hpp"

using namespace sentinel;

namespace {

// First two rows of the published FD001 training file, trailing spaces included.
constexpr const char* kFd001Head =
    "1 1 -0.0007 -0.0004 100.0 518.67 641.82 1589.70 1400.60 14.62 21.61 554.36 2388.06 9046.19 1.30 47.47 521.66 "
    "2388.02 8138.62 8.4195 0.03 392 2388 100.00 39.06 23.4190  \n"
    "1 2 0.0019 -0.0003 100.0 518.67 642.15 1591.82 1403.14 14.62 21.61 553.75 2388.04 9044.07 1.30 47.49 522.28 "
    "2388.07 8131.49 8.4318 0.03 392 2388 100.00 39.00 23.4236  \n";

}  // namespace

TEST(Parse, FirstRowFieldsMatchText) {
  const auto d = parse_cmapss(std::string_view(kFd001Head), SubsetId::FD001, SplitKind::Train);
  ASSERT_EQ(d.trajectories.size(), 1u);
  ASSERT_EQ(d.trajectories[0].length(), 2u);
  const auto& r = d.trajectories[0].records[0];
  EXPECT_EQ(r.unit_id, 1);
  EXPECT_EQ(r.cycle, 1);
  EXPECT_EQ(r.op_settings[0], -0.0007);
  EXPECT_EQ(r.op_settings[2], 100.0);
  EXPECT_EQ(r.sensors[0], 518.67);
  EXPECT_EQ(r.sensors[1], 641.82);
  EXPECT_EQ(r.sensors[8], 9046.19);
  EXPECT_EQ(r.sensors[16], 392.0);
  EXPECT_EQ(r.sensors[20], 23.4190);
}

TEST(Parse, FieldsReadIndependentlyAgree) {
  std::istringstream lines(kFd001Head);
  std::string line;
  std::getline(lines, line);
  std::istringstream fields(line);
  std::vector<double> values;
  double v;
  while (fields >> v) values.push_back(v);
  ASSERT_EQ(values.size(), kFieldsPerRow);
  const auto d = parse_cmapss(std::string_view(kFd001Head), SubsetId::FD001, SplitKind::Train);
  const auto& r = d.trajectories[0].records[0];
  for (std::size_t i = 0; i < kOpSettings; ++i) EXPECT_EQ(r.op_settings[i], values[2 + i]);
  for (std::size_t i = 0; i < kSensors; ++i) EXPECT_EQ(r.sensors[i], values[2 + kOpSettings + i]);
}

TEST(Parse, TwentyFiveFieldsIsMalformed) {
  std::string row = "1 1";
  for (int i = 0; i < 23; ++i) row += " 1.0";
  try {
    parse_cmapss(std::string_view(row), SubsetId::FD001, SplitKind::Train);
    FAIL() << "expected MalformedRow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(Parse, EmptyStreamYieldsEmptyDataset) {
  const auto d = parse_cmapss(std::string_view(""), SubsetId::FD003, SplitKind::Test);
  EXPECT_TRUE(d.trajectories.empty());
  EXPECT_EQ(d.subset_id, SubsetId::FD003);
  EXPECT_EQ(d.split_kind, SplitKind::Test);
}

TEST(Parse, TabsAndBlankLinesAreTolerated) {
  std::string text = kFd001Head;
  for (auto& ch : text) {
    if (ch == ' ') ch = '\t';
  }
  text = "\n" + text + "\n   \n";
  const auto d = parse_cmapss(std::string_view(text), SubsetId::FD001, SplitKind::Train);
  EXPECT_EQ(d, parse_cmapss(std::string_view(kFd001Head), SubsetId::FD001, SplitKind::Train));
}

TEST(Parse, BadNumberReportsLineAndRejectsWholeFile) {
  std::string text = kFd001Head;
  text += "1 3 0.0 0.0 100.0 518.67 abc";
  for (int i = 0; i < 19; ++i) text += " 1.0";
  text += "\n";
  try {
    parse_cmapss(std::string_view(text), SubsetId::FD001, SplitKind::Train);
    FAIL() << "expected MalformedRow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedRow);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Parse, CycleGapIsRejected) {
  auto d = fixtures::fleet({4});
  d.trajectories[0].records.erase(d.trajectories[0].records.begin() + 2);
  const std::string text = serialize_cmapss(d);
  try {
    parse_cmapss(std::string_view(text), SubsetId::FD001, SplitKind::Train);
    FAIL() << "expected NonContiguousCycles";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonContiguousCycles);
  }
}

TEST(Parse, InterleavedUnitsAreGroupedAndSorted) {
  const auto d = fixtures::fleet({3, 2});
  std::string text;
  std::istringstream lines(serialize_cmapss(d));
  std::vector<std::string> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(line);
  for (auto i : {4, 0, 3, 2, 1}) text += rows[static_cast<std::size_t>(i)] + "\n";
  EXPECT_EQ(parse_cmapss(std::string_view(text), SubsetId::FD001, SplitKind::Train), d);
}

TEST(Parse, RoundTripThroughCanonicalText) {
  Rng rng(11);
  FleetDataset d;
  for (int u = 1; u <= 4; ++u) {
    Trajectory t;
    t.unit_id = u * 3;
    const int length = 1 + static_cast<int>(rng.index(30));
    for (int c = 1; c <= length; ++c) {
      SensorRecord r;
      r.unit_id = t.unit_id;
      r.cycle = c;
      for (auto& v : r.op_settings) v = rng.normal(0.0, 10.0);
      for (auto& v : r.sensors) v = rng.uniform(-1e4, 1e4);
      t.records.push_back(r);
    }
    d.trajectories.push_back(t);
  }
  const auto back = parse_cmapss(std::string_view(serialize_cmapss(d)), d.subset_id, d.split_kind);
  EXPECT_EQ(back, d);
}

TEST(Summary, EmptyDataset) {
  const auto s = dataset_summary(FleetDataset{});
  EXPECT_EQ(s.unit_count, 0u);
  EXPECT_EQ(s.record_count, 0u);
}

TEST(Summary, SingleTrajectoryOfLengthFive) {
  const auto s = dataset_summary(fixtures::fleet({5}));
  EXPECT_EQ(s.unit_count, 1u);
  EXPECT_EQ(s.min_length, 5u);
  EXPECT_EQ(s.max_length, 5u);
  EXPECT_EQ(s.mean_length, 5.0);
}

TEST(Summary, ColumnRanges) {
  const auto s = dataset_summary(fixtures::fleet({3, 7}));
  EXPECT_EQ(s.record_count, 10u);
  EXPECT_EQ(s.mean_length, 5.0);
  ASSERT_EQ(s.columns.size(), kFieldsPerRow);
  EXPECT_EQ(s.columns[1].name, "cycle");
  EXPECT_EQ(s.columns[1].max, 7.0);
  EXPECT_EQ(s.columns[5].name, "sensor1");
  EXPECT_EQ(s.columns[5].min, 100.25);
  EXPECT_EQ(s.columns[5].max, 101.75);
  for (const auto& c : s.columns) EXPECT_EQ(c.present, 10u);
}

TEST(Subsets, FactsAndFileNames) {
  EXPECT_EQ(subset_facts(SubsetId::FD001).train_engines, 100u);
  EXPECT_EQ(subset_facts(SubsetId::FD002).train_engines, 260u);
  EXPECT_EQ(subset_facts(SubsetId::FD002).test_engines, 259u);
  EXPECT_EQ(subset_facts(SubsetId::FD004).train_engines, 249u);
  EXPECT_EQ(subset_facts(SubsetId::FD004).test_engines, 248u);
  EXPECT_FALSE(is_multi_regime(SubsetId::FD003));
  EXPECT_TRUE(is_multi_regime(SubsetId::FD004));
  EXPECT_EQ(cmapss_file_name(SubsetId::FD003, SplitKind::Test), "test_FD003.txt");
  EXPECT_EQ(parse_subset_id("FD002"), SubsetId::FD002);
  EXPECT_THROW(parse_subset_id("FD005"), Error);
}
