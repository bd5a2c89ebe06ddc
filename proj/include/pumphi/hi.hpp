#pragma once

// Health-index derivation: pumping duration per pressure segment, a linear
// degradation fit T_i = k_i * n_runs + d_i per segment, the clean-chamber
// baseline, the impact over one cleaning cycle, and selection of the segment
// whose duration tracks contamination best.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pumphi/core.hpp"
#include "pumphi/error.hpp"
#include "pumphi/parallel.hpp"

namespace pumphi {

// First time the curve reaches <= level, interpolated linearly in log(pressure)
// between the bracketing samples. nullopt when the level is never reached.
inline std::optional<double> crossing_time(const PressureCurve& curve, double level) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.p[i] > level) continue;
    if (i == 0) return curve.t[0];
    const double la = std::log(curve.p[i - 1]);
    const double lb = std::log(curve.p[i]);
    const double frac = (la - std::log(level)) / (la - lb);
    return curve.t[i - 1] + frac * (curve.t[i] - curve.t[i - 1]);
  }
  return std::nullopt;
}

// Pumping duration through the segment; nullopt marks an incomplete pumpdown.
inline std::optional<double> extract_segment_duration(const PressureCurve& curve,
                                                      const SegmentSpec& segment) {
  require(!curve.empty(), Errc::empty_curve, "pressure curve has no samples");
  const auto t_upper = crossing_time(curve, segment.upper);
  if (!t_upper) return std::nullopt;
  const auto t_lower = crossing_time(curve, segment.lower);
  if (!t_lower) return std::nullopt;
  return *t_lower - *t_upper;
}

struct DurationPoint {
  double n_runs = 0.0;
  double duration = 0.0;
};

struct LinearFit {
  double k = 0.0;  // seconds per run
  double d = 0.0;  // seconds
};

inline LinearFit fit_ols(std::span<const DurationPoint> points) {
  require(points.size() >= 2, Errc::degenerate_input, "OLS needs at least two points");
  const double n = static_cast<double>(points.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.n_runs;
    mean_y += p.duration;
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = p.n_runs - mean_x;
    sxx += dx * dx;
    sxy += dx * (p.duration - mean_y);
  }
  require(sxx > 0.0, Errc::degenerate_input, "OLS needs at least two distinct n_runs values");
  LinearFit fit;
  fit.k = sxy / sxx;
  fit.d = mean_y - fit.k * mean_x;
  return fit;
}

inline double r_squared(std::span<const DurationPoint> points, const LinearFit& fit) {
  require(points.size() >= 2, Errc::degenerate_input, "R2 needs at least two points");
  double mean_y = 0.0;
  for (const auto& p : points) mean_y += p.duration;
  mean_y /= static_cast<double>(points.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto& p : points) {
    const double r = p.duration - (fit.k * p.n_runs + fit.d);
    ss_res += r * r;
    ss_tot += (p.duration - mean_y) * (p.duration - mean_y);
  }
  require(ss_tot > 0.0, Errc::zero_variance, "durations are constant");
  return 1.0 - ss_res / ss_tot;
}

// Mean duration over runs with n_runs < clean_window, pooled over all cycles.
inline double clean_baseline(std::span<const DurationPoint> points, int clean_window = 10) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : points) {
    if (p.n_runs < clean_window) {
      sum += p.duration;
      ++count;
    }
  }
  require(count > 0, Errc::no_clean_runs, "no runs within the first " +
                                              std::to_string(clean_window) + " after cleaning");
  return sum / static_cast<double>(count);
}

// Relative duration growth over one cleaning cycle, percent of the clean baseline.
inline double impact(double k, double t_bar, int cycle_length = 100) {
  require(t_bar > 0.0, Errc::zero_baseline, "clean baseline must be > 0");
  return 100.0 * k * static_cast<double>(cycle_length) / t_bar;
}

struct DegradationFit {
  SegmentSpec segment;
  double k = std::numeric_limits<double>::quiet_NaN();
  double d = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double t_bar = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  std::size_t n_points = 0;
  bool viable = false;
  std::string status;  // empty when viable, else the error code name
};

inline DegradationFit fit_segment(const SegmentSpec& segment, std::span<const DurationPoint> points,
                                  int cycle_length, int clean_window = 10) {
  DegradationFit fit;
  fit.segment = segment;
  fit.n_points = points.size();
  try {
    const LinearFit line = fit_ols(points);
    fit.k = line.k;
    fit.d = line.d;
    fit.r2 = r_squared(points, line);
    fit.t_bar = clean_baseline(points, clean_window);
    fit.alpha = impact(fit.k, fit.t_bar, cycle_length);
    fit.viable = true;
  } catch (const Error& e) {
    fit.viable = false;
    fit.status = std::string(errc_name(e.code()));
  }
  return fit;
}

// Index of the best fit: highest r2, then larger alpha, then lower segment index.
inline std::optional<std::size_t> select_segment(std::span<const DegradationFit> fits) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    if (!f.viable) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = fits[*best];
    const bool better =
        f.r2 > b.r2 || (f.r2 == b.r2 && (f.alpha > b.alpha ||
                                         (f.alpha == b.alpha && f.segment.index < b.segment.index)));
    if (better) best = i;
  }
  return best;
}

struct HiEntry {
  std::int64_t run_id = 0;
  int asset_id = 0;
  double start_time = 0.0;
  int n_runs = 0;
  double hi = 0.0;  // seconds

  bool operator==(const HiEntry&) const = default;
};

struct HiSeries {
  std::vector<HiEntry> entries;
  SegmentSpec selected_segment;
};

// Which runs feed the degradation fits. Unset fields pick the first asset and
// that asset's most frequent recipe.
struct AnalysisSubset {
  std::optional<int> asset_id;
  std::optional<std::string> recipe_id;
  std::size_t max_runs = 400;
};

struct HiOptions {
  std::vector<SegmentSpec> segments = default_segments();
  int cycle_length = 100;
  int clean_window = 10;
  AnalysisSubset subset;
  unsigned threads = 1;
};

struct HiDerivation {
  std::vector<DegradationFit> fits;
  std::size_t selected = 0;  // index into fits
  HiSeries series;
  std::vector<std::size_t> subset_runs;  // indices into the input runs
};

// durations[run][segment]
inline std::vector<std::vector<std::optional<double>>> segment_durations(
    std::span<const RunRecord> runs, const SensorSet& sensors,
    std::span<const SegmentSpec> segments, unsigned threads = 1) {
  std::vector<std::vector<std::optional<double>>> out(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    const PressureCurve curve = composite_curve(runs[i], sensors);
    auto& row = out[i];
    row.resize(segments.size());
    if (curve.empty()) return;
    for (std::size_t s = 0; s < segments.size(); ++s) {
      row[s] = extract_segment_duration(curve, segments[s]);
    }
  });
  return out;
}

inline std::vector<std::size_t> select_analysis_runs(std::span<const RunRecord> runs,
                                                     const AnalysisSubset& subset) {
  require(!runs.empty(), Errc::data, "dataset has no runs");
  int asset = runs.front().asset_id;
  if (subset.asset_id) {
    asset = *subset.asset_id;
  } else {
    for (const auto& r : runs) asset = std::min(asset, r.asset_id);
  }
  std::string recipe;
  if (subset.recipe_id) {
    recipe = *subset.recipe_id;
  } else {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : runs) {
      if (r.asset_id == asset) ++counts[r.recipe_id];
    }
    std::size_t best = 0;
    for (const auto& [id, n] : counts) {
      if (n > best) {
        best = n;
        recipe = id;
      }
    }
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].asset_id == asset && runs[i].recipe_id == recipe) idx.push_back(i);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return runs[a].start_time < runs[b].start_time;
  });
  if (idx.size() > subset.max_runs) idx.resize(subset.max_runs);
  require(!idx.empty(), Errc::data,
          "analysis subset is empty (asset " + std::to_string(asset) + ", recipe " + recipe + ")");
  return idx;
}

inline HiDerivation derive_hi(std::span<const RunRecord> runs, const SensorSet& sensors,
                              const HiOptions& opt = {}) {
  require(!opt.segments.empty(), Errc::config, "at least one segment is required");
  for (const auto& s : opt.segments) validate(s);
  require(opt.cycle_length >= 1, Errc::config, "cycle_length must be >= 1");

  const auto durations = segment_durations(runs, sensors, opt.segments, opt.threads);
  HiDerivation out;
  out.subset_runs = select_analysis_runs(runs, opt.subset);

  for (std::size_t s = 0; s < opt.segments.size(); ++s) {
    std::vector<DurationPoint> points;
    for (std::size_t i : out.subset_runs) {
      if (durations[i][s]) points.push_back({static_cast<double>(runs[i].n_runs), *durations[i][s]});
    }
    out.fits.push_back(fit_segment(opt.segments[s], points, opt.cycle_length, opt.clean_window));
  }
  const auto best = select_segment(out.fits);
  if (!best) fail(Errc::no_viable_segment, "every segment fit is degenerate");
  out.selected = *best;

  out.series.selected_segment = opt.segments[*best];
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& d = durations[i][*best];
    if (!d || !(*d > 0.0)) continue;
    out.series.entries.push_back(
        {runs[i].run_id, runs[i].asset_id, runs[i].start_time, runs[i].n_runs, *d});
  }
  return out;
}

}  // namespace pumphi
