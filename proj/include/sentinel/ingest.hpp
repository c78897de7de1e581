#pragma once

// CMAPSS text ingestion: one record per line, 26 whitespace-separated fields
// (unit, cycle, setting1..3, sensor1..21).

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sentinel/error.hpp"

namespace sentinel {

inline constexpr std::size_t kOpSettings = 3;
inline constexpr std::size_t kSensors = 21;
inline constexpr std::size_t kFieldsPerRow = 2 + kOpSettings + kSensors;

enum class SubsetId { FD001, FD002, FD003, FD004 };
enum class SplitKind { Train, Test };

inline std::string to_string(SubsetId id) {
  switch (id) {
    case SubsetId::FD001: return "FD001";
    case SubsetId::FD002: return "FD002";
    case SubsetId::FD003: return "FD003";
    case SubsetId::FD004: return "FD004";
  }
  return "FD001";
}

inline std::string to_string(SplitKind kind) { return kind == SplitKind::Train ? "train" : "test"; }

inline SubsetId parse_subset_id(std::string_view text) {
  if (text == "FD001") return SubsetId::FD001;
  if (text == "FD002") return SubsetId::FD002;
  if (text == "FD003") return SubsetId::FD003;
  if (text == "FD004") return SubsetId::FD004;
  throw Error(ErrorKind::InvalidArgument, "unknown subset '" + std::string(text) + "'");
}

inline SplitKind parse_split_kind(std::string_view text) {
  if (text == "train") return SplitKind::Train;
  if (text == "test") return SplitKind::Test;
  throw Error(ErrorKind::InvalidArgument, "unknown split '" + std::string(text) + "'");
}

// Published subset facts: operating conditions, fault modes, train/test engines.
struct SubsetFacts {
  int operating_conditions;
  int fault_modes;
  std::size_t train_engines;
  std::size_t test_engines;
};

inline SubsetFacts subset_facts(SubsetId id) {
  switch (id) {
    case SubsetId::FD001: return {1, 1, 100, 100};
    case SubsetId::FD002: return {6, 1, 260, 259};
    case SubsetId::FD003: return {1, 2, 100, 100};
    case SubsetId::FD004: return {6, 2, 249, 248};
  }
  return {1, 1, 0, 0};
}

inline bool is_multi_regime(SubsetId id) { return subset_facts(id).operating_conditions > 1; }

// Official file name inside the NASA archive, e.g. "train_FD001.txt".
inline std::string cmapss_file_name(SubsetId id, SplitKind kind) {
  return to_string(kind) + "_" + to_string(id) + ".txt";
}

struct SensorRecord {
  int unit_id = 0;
  int cycle = 0;
  std::array<double, kOpSettings> op_settings{};
  std::array<double, kSensors> sensors{};

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

struct Trajectory {
  int unit_id = 0;
  std::vector<SensorRecord> records;

  std::size_t length() const { return records.size(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct FleetDataset {
  SubsetId subset_id = SubsetId::FD001;
  SplitKind split_kind = SplitKind::Train;
  std::vector<Trajectory> trajectories;

  const Trajectory* find_unit(int unit_id) const {
    for (const auto& t : trajectories) {
      if (t.unit_id == unit_id) return &t;
    }
    return nullptr;
  }

  friend bool operator==(const FleetDataset&, const FleetDataset&) = default;
};

namespace detail {

inline bool is_field_separator(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && is_field_separator(line[pos])) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !is_field_separator(line[end])) ++end;
    fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

inline std::optional<double> parse_double(std::string_view field) {
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

// Unit and cycle columns are integers, but some exports write them as "1.0".
inline std::optional<int> parse_index(std::string_view field) {
  auto value = parse_double(field);
  if (!value || *value != static_cast<double>(static_cast<long long>(*value))) return std::nullopt;
  if (*value < 1.0 || *value > static_cast<double>(std::numeric_limits<int>::max())) return std::nullopt;
  return static_cast<int>(*value);
}

inline std::string format_double(double value) {
  std::array<char, 64> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), ptr);
}

}  // namespace detail

/// Parses a CMAPSS text stream. The parse is all-or-nothing: the first bad row
/// throws and no partial dataset escapes.
inline FleetDataset parse_cmapss(std::istream& in, SubsetId subset_id, SplitKind split_kind) {
  std::map<int, Trajectory> units;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    const std::string where = "line " + std::to_string(line_number);
    if (fields.size() != kFieldsPerRow) {
      throw Error(ErrorKind::MalformedRow, where + ": expected " + std::to_string(kFieldsPerRow) +
                                               " fields, found " + std::to_string(fields.size()));
    }
    SensorRecord record;
    auto unit = detail::parse_index(fields[0]);
    auto cycle = detail::parse_index(fields[1]);
    if (!unit || !cycle) {
      throw Error(ErrorKind::MalformedRow, where + ": unit and cycle must be positive integers");
    }
    record.unit_id = *unit;
    record.cycle = *cycle;
    for (std::size_t i = 0; i < kOpSettings + kSensors; ++i) {
      auto value = detail::parse_double(fields[2 + i]);
      if (!value) {
        throw Error(ErrorKind::MalformedRow,
                    where + ": field " + std::to_string(3 + i) + " is not numeric ('" + std::string(fields[2 + i]) + "')");
      }
      if (i < kOpSettings) {
        record.op_settings[i] = *value;
      } else {
        record.sensors[i - kOpSettings] = *value;
      }
    }
    auto& trajectory = units[record.unit_id];
    trajectory.unit_id = record.unit_id;
    trajectory.records.push_back(record);
  }

  FleetDataset dataset{subset_id, split_kind, {}};
  dataset.trajectories.reserve(units.size());
  for (auto& [unit_id, trajectory] : units) {
    std::stable_sort(trajectory.records.begin(), trajectory.records.end(),
                     [](const SensorRecord& a, const SensorRecord& b) { return a.cycle < b.cycle; });
    for (std::size_t i = 0; i < trajectory.records.size(); ++i) {
      if (trajectory.records[i].cycle != static_cast<int>(i) + 1) {
        throw Error(ErrorKind::NonContiguousCycles,
                    "unit " + std::to_string(unit_id) + ": expected cycle " + std::to_string(i + 1) +
                        ", found " + std::to_string(trajectory.records[i].cycle));
      }
    }
    dataset.trajectories.push_back(std::move(trajectory));
  }
  return dataset;
}

inline FleetDataset parse_cmapss(std::string_view text, SubsetId subset_id, SplitKind split_kind) {
  std::istringstream in{std::string(text)};
  return parse_cmapss(in, subset_id, split_kind);
}

// Canonical form: one space between fields, shortest round-trip decimals.
inline void serialize_cmapss(const FleetDataset& dataset, std::ostream& out) {
  for (const auto& trajectory : dataset.trajectories) {
    for (const auto& r : trajectory.records) {
      out << r.unit_id << ' ' << r.cycle;
      for (double v : r.op_settings) out << ' ' << detail::format_double(v);
      for (double v : r.sensors) out << ' ' << detail::format_double(v);
      out << '\n';
    }
  }
}

inline std::string serialize_cmapss(const FleetDataset& dataset) {
  std::ostringstream out;
  serialize_cmapss(dataset, out);
  return out.str();
}

inline std::string column_name(std::size_t column) {
  if (column == 0) return "unit";
  if (column == 1) return "cycle";
  if (column < 2 + kOpSettings) return "setting" + std::to_string(column - 1);
  return "sensor" + std::to_string(column - 1 - kOpSettings);
}

struct ColumnSummary {
  std::string name;
  std::size_t present = 0;  // records carrying a finite value in this column
  double min = 0.0;
  double max = 0.0;
};

struct SummaryTable {
  std::string subset;
  std::string split;
  std::size_t unit_count = 0;
  std::size_t record_count = 0;
  std::size_t min_length = 0;
  std::size_t max_length = 0;
  double mean_length = 0.0;
  std::vector<ColumnSummary> columns;
};

inline SummaryTable dataset_summary(const FleetDataset& dataset) {
  SummaryTable table;
  table.subset = to_string(dataset.subset_id);
  table.split = to_string(dataset.split_kind);
  table.unit_count = dataset.trajectories.size();
  table.columns.resize(kFieldsPerRow);
  for (std::size_t c = 0; c < kFieldsPerRow; ++c) {
    table.columns[c].name = column_name(c);
    table.columns[c].min = std::numeric_limits<double>::infinity();
    table.columns[c].max = -std::numeric_limits<double>::infinity();
  }
  if (dataset.trajectories.empty()) {
    for (auto& column : table.columns) column.min = column.max = 0.0;
    return table;
  }

  table.min_length = std::numeric_limits<std::size_t>::max();
  for (const auto& trajectory : dataset.trajectories) {
    const std::size_t length = trajectory.length();
    table.min_length = std::min(table.min_length, length);
    table.max_length = std::max(table.max_length, length);
    table.record_count += length;
    for (const auto& r : trajectory.records) {
      auto visit = [&](std::size_t c, double v) {
        if (!std::isfinite(v)) return;
        auto& column = table.columns[c];
        ++column.present;
        column.min = std::min(column.min, v);
        column.max = std::max(column.max, v);
      };
      visit(0, r.unit_id);
      visit(1, r.cycle);
      for (std::size_t i = 0; i < kOpSettings; ++i) visit(2 + i, r.op_settings[i]);
      for (std::size_t i = 0; i < kSensors; ++i) visit(2 + kOpSettings + i, r.sensors[i]);
    }
  }
  table.mean_length = static_cast<double>(table.record_count) / static_cast<double>(table.unit_count);
  for (auto& column : table.columns) {
    if (column.present == 0) column.min = column.max = 0.0;
  }
  return table;
}

inline void to_json(nlohmann::json& j, const ColumnSummary& c) {
  j = nlohmann::json{{"name", c.name}, {"present", c.present}, {"min", c.min}, {"max", c.max}};
}

inline void to_json(nlohmann::json& j, const SummaryTable& t) {
  j = nlohmann::json{{"subset", t.subset},
                     {"split", t.split},
                     {"unit_count", t.unit_count},
                     {"record_count", t.record_count},
                     {"min_length", t.min_length},
                     {"max_length", t.max_length},
                     {"mean_length", t.mean_length},
                     {"columns", t.columns}};
}

}  // namespace sentinel
