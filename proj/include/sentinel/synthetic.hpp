#pragma once

// Seeded CMAPSS-shaped fleets with a known fault onset, for end-to-end checks
// that do not depend on the NASA files.
//
// Healthy sensors are a stationary Gaussian process: two AR(1) latent factors
// with per-channel loadings plus independent noise. From the first cycle of
// the final `degraded_frac` of life, a monotone drift starting at
// `drift_start_sd` healthy standard deviations is added to `drift_channels`.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sentinel/evaluate.hpp"
#include "sentinel/ingest.hpp"
#include "sentinel/rng.hpp"

namespace sentinel {

struct SyntheticFleetSpec {
  std::size_t units = 20;
  std::size_t length = 200;
  // Unit lengths are drawn uniformly from [length - length_jitter, length + length_jitter].
  std::size_t length_jitter = 0;
  double degraded_frac = 0.10;
  std::vector<std::size_t> drift_channels{1, 6, 10, 13};  // 0-based sensor indices
  double drift_start_sd = 3.0;
  double drift_slope_sd = 0.5;  // added healthy sd per cycle after onset
  double factor_ar = 0.7;
  double idiosyncratic_sd = 3.0;  // relative to unit factor loadings
  bool multi_regime = false;
  // Sensors (0-based) whose value is a pure function of the operating regime,
  // rounded to 0.01 like the published files.
  std::vector<std::size_t> regime_only_channels;
  std::uint64_t seed = 7;
};

struct SyntheticChannel {
  double base = 0.0;
  double scale = 1.0;
  std::array<double, 2> loading{};
  std::array<double, kOpSettings> condition_gain{};

  double healthy_sd(double idiosyncratic_sd) const {
    return scale * std::sqrt(loading[0] * loading[0] + loading[1] * loading[1] + idiosyncratic_sd * idiosyncratic_sd);
  }
};

inline constexpr std::array<std::array<double, kOpSettings>, 6> kSyntheticRegimes{{
    {0.0, 0.0, 100.0},
    {10.0, 0.25, 100.0},
    {20.0, 0.70, 100.0},
    {25.0, 0.62, 60.0},
    {35.0, 0.84, 100.0},
    {42.0, 0.84, 100.0},
}};

struct SyntheticFleet {
  FleetDataset dataset;
  std::array<SyntheticChannel, kSensors> channels{};
  std::vector<int> fault_onset;  // first drifted cycle, per unit (index = unit - 1)
};

inline SyntheticFleet generate_synthetic_fleet(const SyntheticFleetSpec& spec) {
  Rng rng(spec.seed);
  SyntheticFleet fleet;
  fleet.dataset.subset_id = spec.multi_regime ? SubsetId::FD002 : SubsetId::FD001;
  fleet.dataset.split_kind = SplitKind::Train;
  for (auto& ch : fleet.channels) {
    ch.base = rng.uniform(5.0, 2000.0);
    ch.scale = rng.uniform(0.05, 5.0);
    ch.loading = {rng.normal(), rng.normal()};
    for (auto& g : ch.condition_gain) g = rng.uniform(-1.0, 1.0);
  }
  auto is_regime_only = [&](std::size_t s) {
    for (std::size_t c : spec.regime_only_channels) {
      if (c == s) return true;
    }
    return false;
  };
  const double factor_noise = std::sqrt(1.0 - spec.factor_ar * spec.factor_ar);

  for (std::size_t u = 0; u < spec.units; ++u) {
    const std::size_t length =
        spec.length_jitter == 0 ? spec.length : spec.length - spec.length_jitter + rng.index(2 * spec.length_jitter + 1);
    Trajectory trajectory;
    trajectory.unit_id = static_cast<int>(u) + 1;
    const int onset = normal_boundary(length, spec.degraded_frac) + 1;
    fleet.fault_onset.push_back(onset);
    std::array<double, 2> factor{rng.normal(), rng.normal()};
    for (std::size_t t = 0; t < length; ++t) {
      SensorRecord record;
      record.unit_id = trajectory.unit_id;
      record.cycle = static_cast<int>(t) + 1;
      std::array<double, kOpSettings> nominal{0.0, 0.0, 100.0};
      if (spec.multi_regime) {
        const auto& regime = kSyntheticRegimes[rng.index(kSyntheticRegimes.size())];
        nominal = regime;
        record.op_settings = {regime[0] + rng.uniform(-0.005, 0.005), regime[1] + rng.uniform(-0.0005, 0.0005),
                              regime[2]};
      } else {
        record.op_settings = {rng.normal(0.0, 0.002), rng.normal(0.0, 0.0003), 100.0};
      }
      for (auto& f : factor) f = spec.factor_ar * f + factor_noise * rng.normal();
      for (std::size_t s = 0; s < kSensors; ++s) {
        const auto& ch = fleet.channels[s];
        double condition = 0.0;
        if (spec.multi_regime) {
          // Smooth nonlinear response to altitude, Mach and throttle, in units of channel scale * 20.
          // Regime-only channels see the nominal regime, as in the published files.
          const auto& op = is_regime_only(s) ? nominal : record.op_settings;
          const double alt = op[0] / 42.0;
          const double mach = op[1] / 0.84;
          const double tra = op[2] / 100.0;
          condition = 20.0 * ch.scale *
                      (ch.condition_gain[0] * alt + ch.condition_gain[1] * mach * mach + ch.condition_gain[2] * tra +
                       0.5 * alt * tra);
        }
        double value = ch.base + condition;
        if (is_regime_only(s)) {
          value = std::round(value * 100.0) / 100.0;
        } else {
          value += ch.scale * (ch.loading[0] * factor[0] + ch.loading[1] * factor[1] +
                               spec.idiosyncratic_sd * rng.normal());
          if (static_cast<int>(t) + 1 >= onset) {
            for (std::size_t d : spec.drift_channels) {
              if (d == s) {
                const double cycles_in = static_cast<double>(static_cast<int>(t) + 1 - onset);
                value += ch.healthy_sd(spec.idiosyncratic_sd) * (spec.drift_start_sd + spec.drift_slope_sd * cycles_in);
              }
            }
          }
        }
        record.sensors[s] = value;
      }
      trajectory.records.push_back(record);
    }
    fleet.dataset.trajectories.push_back(std::move(trajectory));
  }
  return fleet;
}

}  // namespace sentinel
