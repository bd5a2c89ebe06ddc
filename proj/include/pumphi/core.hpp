#pragma once

// Domain types shared across the library: pressure samples from the four chamber
// gauges, run records, pressure segments, and the priority-within-range sensor
// fusion that turns overlapping gauges into one composite pumpdown curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pumphi/error.hpp"

namespace pumphi {

inline constexpr std::size_t kSensorCount = 4;

struct PressureSample {
  double t = 0.0;  // seconds since run start
  std::array<std::optional<double>, kSensorCount> readings{};  // mbar; nullopt = invalid
};

// A gauge with its trusted measuring range. Lower priority rank wins (1 = first choice).
struct SensorSpec {
  std::string id;
  double min_mbar = 0.0;
  double max_mbar = 0.0;
  int priority = 0;
  double noise_gain = 1.0;  // multiplies the chamber noise sigma for this gauge

  bool contains(double p) const noexcept { return p >= min_mbar && p <= max_mbar; }
};

using SensorSet = std::array<SensorSpec, kSensorCount>;

inline void validate(const SensorSet& sensors) {
  std::set<int> priorities;
  for (const auto& s : sensors) {
    require(s.min_mbar > 0.0 && s.min_mbar < s.max_mbar, Errc::config,
            "sensor " + s.id + " needs 0 < min < max");
    require(s.noise_gain >= 0.0, Errc::config, "sensor " + s.id + " noise_gain must be >= 0");
    require(priorities.insert(s.priority).second, Errc::config,
            "sensor priorities must be unique (duplicate " + std::to_string(s.priority) + ")");
  }
}

// Capacitance gauge for the rough range, Pirani for the fine-vacuum range, and two
// ionisation gauges below 1e-3 mbar. The Pirani is the most precise and ranks first.
inline SensorSet default_sensors() {
  return {{
      {"capacitance", 1.0, 1100.0, 2, 1.0},
      {"pirani", 1e-3, 20.0, 1, 1.0},
      {"ion", 1e-8, 1e-3, 3, 40.0},
      {"cold_cathode", 1e-9, 5e-3, 4, 40.0},
  }};
}

// Extra per-sample process channel (temperature, gas flow, ...), aligned with samples.
struct Channel {
  std::string name;
  std::vector<double> values;
};

// Noiseless simulation state attached by the generator; absent for loaded data.
struct RunTruth {
  double contamination = 0.0;
  double load = 0.0;  // contamination plus seasonal term
  double p_ss = 0.0;
  double tau_stage1 = 0.0;
  double tau_stage2 = 0.0;
  double crossover = 0.0;
  double atmospheric = 0.0;
  std::vector<double> pressure;  // true pressure per sample
};

struct RunRecord {
  std::int64_t run_id = 0;
  int asset_id = 0;
  double start_time = 0.0;  // epoch seconds
  std::string recipe_id;
  int n_runs = 0;  // runs since last maintenance
  std::vector<PressureSample> samples;
  std::vector<Channel> extra_channels;
  std::optional<RunTruth> truth;

  bool operator==(const RunRecord&) const = default;
};

inline bool operator==(const PressureSample& a, const PressureSample& b) {
  return a.t == b.t && a.readings == b.readings;
}
inline bool operator==(const Channel& a, const Channel& b) {
  return a.name == b.name && a.values == b.values;
}
inline bool operator==(const RunTruth& a, const RunTruth& b) {
  return a.contamination == b.contamination && a.load == b.load && a.p_ss == b.p_ss &&
         a.tau_stage1 == b.tau_stage1 && a.tau_stage2 == b.tau_stage2 &&
         a.crossover == b.crossover && a.atmospheric == b.atmospheric &&
         a.pressure == b.pressure;
}

// Pressure interval Δp_i = (upper, lower] in mbar.
struct SegmentSpec {
  int index = 0;  // 1-based
  double upper = 0.0;
  double lower = 0.0;

  std::string label() const { return "dp" + std::to_string(index); }
};

inline void validate(const SegmentSpec& s) {
  require(s.index >= 1, Errc::config, "segment index must be >= 1");
  require(s.upper > s.lower && s.lower > 0.0, Errc::config,
          "segment " + s.label() + " needs upper > lower > 0");
}

// Δp1 ends where the turbopump starts; Δp2 is the published 0.03 -> 0.002 mbar band.
// Δp3..Δp5 are local choices covering the high-vacuum tail.
inline std::vector<SegmentSpec> default_segments() {
  return {{1, 1013.0, 0.02}, {2, 0.03, 0.002}, {3, 0.002, 5e-4}, {4, 5e-4, 2e-4}, {5, 2e-4, 1e-4}};
}

// Sensor indices ordered from first to last choice.
inline std::array<std::size_t, kSensorCount> priority_order(const SensorSet& sensors) {
  std::array<std::size_t, kSensorCount> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sensors[a].priority < sensors[b].priority;
  });
  return order;
}

inline std::optional<double> try_composite_pressure(const PressureSample& sample,
                                                    const SensorSet& sensors) {
  for (std::size_t s : priority_order(sensors)) {
    const auto& r = sample.readings[s];
    if (r && std::isfinite(*r) && *r > 0.0 && sensors[s].contains(*r)) return *r;
  }
  return std::nullopt;
}

inline double composite_pressure(const PressureSample& sample, const SensorSet& sensors) {
  auto p = try_composite_pressure(sample, sensors);
  if (!p) fail(Errc::no_valid_reading, "no sensor reading inside its valid range at t=" +
                                           std::to_string(sample.t));
  return *p;
}

struct PressureCurve {
  std::vector<double> t;
  std::vector<double> p;

  std::size_t size() const noexcept { return t.size(); }
  bool empty() const noexcept { return t.empty(); }
};

// Composite curve of a run. Samples with no usable reading are skipped.
inline PressureCurve composite_curve(const RunRecord& run, const SensorSet& sensors) {
  const auto order = priority_order(sensors);
  PressureCurve curve;
  curve.t.reserve(run.samples.size());
  curve.p.reserve(run.samples.size());
  for (const auto& sample : run.samples) {
    for (std::size_t s : order) {
      const auto& r = sample.readings[s];
      if (r && std::isfinite(*r) && *r > 0.0 && sensors[s].contains(*r)) {
        curve.t.push_back(sample.t);
        curve.p.push_back(*r);
        break;
      }
    }
  }
  return curve;
}

}  // namespace pumphi
