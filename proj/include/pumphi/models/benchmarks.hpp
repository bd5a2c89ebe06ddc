#pragma once

// Naive reference forecasts:
//   bm1  persistence, the health index of the current run;
//   bm2  average cleaning-cycle curve of the train set, indexed by the n_runs of
//        the target run (known in hindsight from the row metadata);
//   bm3  mean of all train targets.

#include <cmath>
#include <cstdlib>
#include <iterator>
#include <map>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"

namespace pumphi {

enum class BenchmarkKind { bm1, bm2, bm3 };

inline const char* benchmark_name(BenchmarkKind k) {
  switch (k) {
    case BenchmarkKind::bm1: return "bm1";
    case BenchmarkKind::bm2: return "bm2";
    case BenchmarkKind::bm3: return "bm3";
  }
  return "?";
}

class Benchmarks {
 public:
  static Benchmarks fit(const SupervisedSet& train) {
    require(train.size() > 0, Errc::empty_train, "benchmarks need training rows");
    Benchmarks b;
    std::map<int, std::pair<double, std::size_t>> acc;
    double total = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      total += train.y[i];
      auto& [sum, count] = acc[train.meta[i].target_n_runs];
      sum += train.y[i];
      ++count;
    }
    b.global_mean_ = total / static_cast<double>(train.size());
    for (const auto& [n, sc] : acc) b.cycle_curve_[n] = sc.first / static_cast<double>(sc.second);
    return b;
  }

  double cycle_value(int n_runs) const {
    if (const auto it = cycle_curve_.find(n_runs); it != cycle_curve_.end()) return it->second;
    // Nearest populated position; the lower one wins a tie.
    const auto hi = cycle_curve_.lower_bound(n_runs);
    if (hi == cycle_curve_.begin()) return hi->second;
    const auto lo = std::prev(hi);
    if (hi == cycle_curve_.end()) return lo->second;
    return (n_runs - lo->first) <= (hi->first - n_runs) ? lo->second : hi->second;
  }

  double predict(BenchmarkKind kind, const RowMeta& row) const {
    switch (kind) {
      case BenchmarkKind::bm1: return row.hi_now;
      case BenchmarkKind::bm2: return cycle_value(row.target_n_runs);
      case BenchmarkKind::bm3: return global_mean_;
    }
    return global_mean_;
  }

  std::vector<double> predict(BenchmarkKind kind, const SupervisedSet& rows) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& m : rows.meta) out.push_back(predict(kind, m));
    return out;
  }

  double global_mean() const noexcept { return global_mean_; }
  const std::map<int, double>& cycle_curve() const noexcept { return cycle_curve_; }

 private:
  std::map<int, double> cycle_curve_;
  double global_mean_ = 0.0;
};

}  // namespace pumphi
