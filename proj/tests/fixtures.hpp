#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sentinel/sentinel.hpp"

namespace fixtures {

// A record whose fields are simple functions of (unit, cycle).
inline sentinel::SensorRecord record(int unit, int cycle, double level = 0.0) {
  sentinel::SensorRecord r;
  r.unit_id = unit;
  r.cycle = cycle;
  r.op_settings = {0.001 * cycle, -0.0002 * unit, 100.0};
  for (std::size_t s = 0; s < sentinel::kSensors; ++s) r.sensors[s] = 100.0 * (s + 1) + level + 0.25 * cycle;
  return r;
}

inline sentinel::FleetDataset fleet(const std::vector<std::size_t>& lengths) {
  sentinel::FleetDataset d;
  for (std::size_t u = 0; u < lengths.size(); ++u) {
    sentinel::Trajectory t;
    t.unit_id = static_cast<int>(u) + 1;
    for (std::size_t c = 1; c <= lengths[u]; ++c) t.records.push_back(record(t.unit_id, static_cast<int>(c)));
    d.trajectories.push_back(std::move(t));
  }
  return d;
}

inline sentinel::AutoencoderDims tiny_dims() {
  sentinel::AutoencoderDims d;
  d.input_channels = 3;
  d.scored_channels = 2;
  d.window = 4;
  d.encoder_hidden = {3, 2, 2};
  return d;
}

inline oracle::Architecture architecture(const sentinel::AutoencoderDims& d) {
  return {d.input_channels, d.scored_channels, d.window, d.encoder_hidden};
}

inline sentinel::Matrix random_window(const sentinel::AutoencoderDims& d, sentinel::Rng& rng) {
  sentinel::Matrix w(d.input_channels, d.window);
  for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
  return w;
}

inline std::vector<std::vector<double>> nested(const sentinel::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

// Random tiny model with parameters spread wider than the default init so
// every gate operates away from its linear regime.
inline sentinel::AutoencoderModel random_tiny_model(std::uint64_t seed) {
  sentinel::AutoencoderModel model(tiny_dims());
  sentinel::Rng rng(seed);
  for (double& p : model.params()) p = rng.uniform(-1.0, 1.0);
  return model;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("sentinel_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
             std::to_string(std::rand()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
