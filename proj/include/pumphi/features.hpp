#pragma once

// Supervised horizon-h dataset: per-run channel aggregates, the maintenance
// counter, and one-hot recipe blocks for the current run and the planned next h
// runs; target is the health index h runs ahead on the same asset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pumphi/core.hpp"
#include "pumphi/error.hpp"
#include "pumphi/hi.hpp"
#include "pumphi/simgen.hpp"

namespace pumphi {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

struct ChannelAggregate {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
};

// Welford single pass.
inline ChannelAggregate aggregate(std::span<const double> values) {
  require(!values.empty(), Errc::empty_channel, "channel has no values");
  ChannelAggregate a;
  a.min = values[0];
  a.max = values[0];
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
    a.min = std::min(a.min, v);
    a.max = std::max(a.max, v);
  }
  a.mean = mean;
  a.std = std::sqrt(std::max(0.0, m2 / static_cast<double>(n)));
  return a;
}

inline constexpr const char* kPressureChannel = "log10_p";

// Channels aggregated per run: the composite pressure (log10 mbar), then the
// run's extra channels in record order.
inline std::vector<std::pair<std::string, ChannelAggregate>> aggregate_channels(
    const RunRecord& run, const SensorSet& sensors) {
  std::vector<std::pair<std::string, ChannelAggregate>> out;
  const PressureCurve curve = composite_curve(run, sensors);
  std::vector<double> logp(curve.p.size());
  std::transform(curve.p.begin(), curve.p.end(), logp.begin(), [](double p) { return std::log10(p); });
  out.emplace_back(kPressureChannel, aggregate(logp));
  for (const auto& ch : run.extra_channels) out.emplace_back(ch.name, aggregate(ch.values));
  return out;
}

inline std::vector<double> encode_recipe_plan(std::span<const std::string> plan,
                                              std::span<const std::string> vocab,
                                              std::size_t horizon = 10) {
  require(plan.size() == horizon, Errc::bad_plan_length,
          "plan has " + std::to_string(plan.size()) + " entries, expected " + std::to_string(horizon));
  std::vector<double> out(horizon * vocab.size(), 0.0);
  for (std::size_t b = 0; b < plan.size(); ++b) {
    const auto it = std::find(vocab.begin(), vocab.end(), plan[b]);
    if (it != vocab.end()) out[b * vocab.size() + static_cast<std::size_t>(it - vocab.begin())] = 1.0;
  }
  return out;
}

struct RowMeta {
  int asset_id = 0;
  std::int64_t run_id = 0;
  std::int64_t target_run_id = 0;
  double start_time = 0.0;
  int n_runs = 0;
  int target_n_runs = 0;
  double hi_now = 0.0;  // health index of the current run
  std::string recipe;
  std::vector<std::string> planned;  // recipes of runs t+1..t+h

  bool operator==(const RowMeta&) const = default;
};

struct SupervisedSet {
  std::vector<std::string> names;
  Matrix X;
  std::vector<double> y;
  std::vector<RowMeta> meta;
  std::vector<std::string> vocab;
  std::size_t horizon = 10;

  std::size_t size() const noexcept { return y.size(); }
};

struct FeatureOptions {
  std::size_t horizon = 10;
  double train_frac = 0.7;
  unsigned threads = 1;
};

namespace detail {

struct RawRow {
  RowMeta meta;
  std::vector<double> numeric;
  double target = 0.0;
};

inline std::size_t train_count(std::size_t n, double train_frac) {
  return static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
}

}  // namespace detail

// Sorted recipe ids seen in the given rows, current and planned.
inline std::vector<std::string> recipe_vocabulary(std::span<const RowMeta> rows) {
  std::set<std::string> ids;
  for (const auto& m : rows) {
    ids.insert(m.recipe);
    ids.insert(m.planned.begin(), m.planned.end());
  }
  return {ids.begin(), ids.end()};
}

// Builds all rows, orders them by (start_time, asset_id), takes the recipe
// vocabulary from the oldest train_frac of rows, and encodes every row with it.
inline SupervisedSet build_supervised(std::span<const RunRecord> runs, const HiSeries& hi,
                                      std::span<const PlanEntry> plan, const SensorSet& sensors,
                                      const FeatureOptions& opt = {}) {
  require(opt.horizon >= 1, Errc::config, "horizon must be >= 1");
  require(opt.train_frac > 0.0 && opt.train_frac < 1.0, Errc::config, "train_frac must be in (0, 1)");

  std::unordered_map<std::int64_t, double> hi_by_run;
  for (const auto& e : hi.entries) hi_by_run.emplace(e.run_id, e.hi);
  std::map<std::pair<int, int>, std::string> plan_at;
  for (const auto& p : plan) plan_at[{p.asset_id, p.position}] = p.recipe_id;

  std::map<int, std::vector<std::size_t>> by_asset;
  for (std::size_t i = 0; i < runs.size(); ++i) by_asset[runs[i].asset_id].push_back(i);
  for (auto& [asset, idx] : by_asset) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return runs[a].start_time < runs[b].start_time;
    });
  }

  struct Pending {
    std::size_t run;
    std::size_t target;
    int asset;
    int position;
  };
  std::vector<Pending> pending;
  for (const auto& [asset, idx] : by_asset) {
    for (std::size_t pos = 0; pos + opt.horizon < idx.size(); ++pos) {
      pending.push_back({idx[pos], idx[pos + opt.horizon], asset, static_cast<int>(pos)});
    }
  }

  std::vector<std::optional<detail::RawRow>> built(pending.size());
  parallel_for(pending.size(), opt.threads, [&](std::size_t i) {
    const auto& pd = pending[i];
    const RunRecord& now = runs[pd.run];
    const RunRecord& later = runs[pd.target];
    const auto hi_now = hi_by_run.find(now.run_id);
    const auto hi_later = hi_by_run.find(later.run_id);
    if (hi_now == hi_by_run.end() || hi_later == hi_by_run.end()) return;
    detail::RawRow row;
    for (std::size_t h = 1; h <= opt.horizon; ++h) {
      const auto it = plan_at.find({pd.asset, pd.position + static_cast<int>(h)});
      if (it == plan_at.end()) return;
      row.meta.planned.push_back(it->second);
    }
    row.meta.asset_id = now.asset_id;
    row.meta.run_id = now.run_id;
    row.meta.target_run_id = later.run_id;
    row.meta.start_time = now.start_time;
    row.meta.n_runs = now.n_runs;
    row.meta.target_n_runs = later.n_runs;
    row.meta.hi_now = hi_now->second;
    row.meta.recipe = now.recipe_id;
    for (const auto& [name, agg] : aggregate_channels(now, sensors)) {
      row.numeric.insert(row.numeric.end(), {agg.mean, agg.min, agg.max, agg.std});
    }
    row.numeric.push_back(static_cast<double>(now.n_runs));
    row.target = hi_later->second;
    built[i] = std::move(row);
  });

  std::vector<detail::RawRow> rows;
  for (auto& r : built) {
    if (r) rows.push_back(std::move(*r));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const detail::RawRow& a, const detail::RawRow& b) {
    if (a.meta.start_time != b.meta.start_time) return a.meta.start_time < b.meta.start_time;
    return a.meta.asset_id < b.meta.asset_id;
  });

  SupervisedSet set;
  set.horizon = opt.horizon;
  if (!runs.empty()) {
    for (const auto& [name, agg] : aggregate_channels(runs.front(), sensors)) {
      for (const char* stat : {"mean", "min", "max", "std"}) set.names.push_back(name + "_" + stat);
    }
  }
  set.names.push_back("n_runs");

  std::vector<RowMeta> train_meta;
  const std::size_t n_train = detail::train_count(rows.size(), opt.train_frac);
  for (std::size_t i = 0; i < n_train; ++i) train_meta.push_back(rows[i].meta);
  set.vocab = recipe_vocabulary(train_meta);
  require(!set.vocab.empty(), Errc::vocabulary_empty, "no recipes in the training rows");

  for (const auto& r : set.vocab) set.names.push_back("recipe_" + r);
  for (std::size_t b = 1; b <= opt.horizon; ++b) {
    for (const auto& r : set.vocab) set.names.push_back("plan" + std::to_string(b) + "_" + r);
  }

  set.X = Matrix(rows.size(), set.names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto out = set.X.row(i);
    require(rows[i].numeric.size() + set.vocab.size() * (1 + opt.horizon) == out.size(), Errc::data,
            "run " + std::to_string(rows[i].meta.run_id) + " has a different channel layout");
    std::size_t j = 0;
    for (double v : rows[i].numeric) out[j++] = v;
    const std::string current[1] = {rows[i].meta.recipe};
    for (double v : encode_recipe_plan(current, set.vocab, 1)) out[j++] = v;
    for (double v : encode_recipe_plan(rows[i].meta.planned, set.vocab, opt.horizon)) out[j++] = v;
    set.y.push_back(rows[i].target);
    set.meta.push_back(std::move(rows[i].meta));
  }
  return set;
}

inline SupervisedSet subset_rows(const SupervisedSet& set, std::size_t begin, std::size_t end) {
  SupervisedSet out;
  out.names = set.names;
  out.vocab = set.vocab;
  out.horizon = set.horizon;
  out.X = Matrix(end - begin, set.X.cols);
  std::copy(set.X.data.begin() + static_cast<std::ptrdiff_t>(begin * set.X.cols),
            set.X.data.begin() + static_cast<std::ptrdiff_t>(end * set.X.cols), out.X.data.begin());
  out.y.assign(set.y.begin() + static_cast<std::ptrdiff_t>(begin),
               set.y.begin() + static_cast<std::ptrdiff_t>(end));
  out.meta.assign(set.meta.begin() + static_cast<std::ptrdiff_t>(begin),
                  set.meta.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

// Oldest floor(train_frac * n) rows train, the rest test.
inline std::pair<SupervisedSet, SupervisedSet> chrono_split(const SupervisedSet& set,
                                                            double train_frac = 0.7) {
  require(set.size() >= 10, Errc::too_few_rows,
          "need at least 10 rows to split, have " + std::to_string(set.size()));
  require(train_frac > 0.0 && train_frac < 1.0, Errc::config, "train_frac must be in (0, 1)");
  const std::size_t n_train = detail::train_count(set.size(), train_frac);
  return {subset_rows(set, 0, n_train), subset_rows(set, n_train, set.size())};
}

// Per-column z-scoring with statistics from the training matrix.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;  // population; 0 maps the column to 0

  static Standardizer fit(const Matrix& X) {
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.std.assign(X.cols, 0.0);
    if (X.rows == 0) return s;
    for (std::size_t j = 0; j < X.cols; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < X.rows; ++i) m += X(i, j);
      m /= static_cast<double>(X.rows);
      double v = 0.0;
      for (std::size_t i = 0; i < X.rows; ++i) v += (X(i, j) - m) * (X(i, j) - m);
      s.mean[j] = m;
      s.std[j] = std::sqrt(v / static_cast<double>(X.rows));
    }
    return s;
  }

  void apply(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < in.size(); ++j) {
      out[j] = std[j] > 0.0 ? (in[j] - mean[j]) / std[j] : 0.0;
    }
  }

  std::vector<double> apply(std::span<const double> in) const {
    std::vector<double> out(in.size());
    apply(in, out);
    return out;
  }

  Matrix apply(const Matrix& X) const {
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < X.rows; ++i) apply(X.row(i), out.row(i));
    return out;
  }

  bool operator==(const Standardizer&) const = default;
};

inline Matrix standardize(const Matrix& train, const Matrix& target) {
  require(train.rows > 0, Errc::empty_train, "standardization needs training rows");
  return Standardizer::fit(train).apply(target);
}

}  // namespace pumphi
