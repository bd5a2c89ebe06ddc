#pragma once

// CART regression tree. Splits are axis-aligned at midpoints between consecutive
// distinct feature values and minimise the summed squared error of the children.
// Scanning features and thresholds in ascending order with a strict comparison
// resolves SSE ties toward the lower feature index, then the lower threshold.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/random.hpp"

namespace pumphi {

struct TreeParams {
  int max_depth = 8;         // < 0 means unlimited
  int min_samples_leaf = 5;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;      // mean target of the node's samples
  double split_sse = 0.0;  // children SSE of the chosen split (internal nodes)
  double sse = 0.0;        // node SSE
  std::size_t n_samples = 0;

  bool operator==(const TreeNode&) const = default;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Best split of rows `idx` over `features`; feature = -1 when none is admissible.
inline SplitCandidate best_split(const Matrix& X, std::span<const double> y,
                                 std::span<const std::size_t> idx, std::span<const int> features,
                                 std::size_t min_leaf) {
  SplitCandidate best;
  const std::size_t n = idx.size();
  if (n < 2 * std::max<std::size_t>(1, min_leaf)) return best;
  double centre = 0.0;
  for (std::size_t i : idx) centre += y[i];
  centre /= static_cast<double>(n);

  std::vector<std::pair<double, double>> column(n);  // (feature value, centred target)
  double total = 0.0, total_sq = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double yc = y[idx[r]] - centre;
    total += yc;
    total_sq += yc * yc;
  }
  for (int f : features) {
    for (std::size_t r = 0; r < n; ++r) column[r] = {X(idx[r], static_cast<std::size_t>(f)), y[idx[r]] - centre};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double left = 0.0, left_sq = 0.0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
      left += column[r].second;
      left_sq += column[r].second * column[r].second;
      if (column[r].first == column[r + 1].first) continue;
      const std::size_t nl = r + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right = total - left;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left * left / static_cast<double>(nl)) +
                         (right_sq - right * right / static_cast<double>(nr));
      if (sse < best.sse) {
        best.sse = std::max(0.0, sse);
        best.feature = f;
        best.threshold = 0.5 * (column[r].first + column[r + 1].first);
      }
    }
  }
  return best;
}

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  // Fits on the multiset of row indices `idx` (bootstrap samples may repeat rows).
  // With a sampler, each split considers `features_per_split` features drawn
  // without replacement.
  static RegressionTree fit(const Matrix& X, std::span<const double> y,
                            std::vector<std::size_t> idx, const TreeParams& params,
                            Rng* sampler = nullptr, std::size_t features_per_split = 0) {
    require(!idx.empty(), Errc::empty_training, "decision tree needs at least one row");
    RegressionTree tree;
    std::vector<int> all(X.cols);
    std::iota(all.begin(), all.end(), 0);
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params.min_samples_leaf));
    tree.grow(X, y, idx, 0, params, min_leaf, all, sampler, features_per_split);
    return tree;
  }

  static RegressionTree fit(const Matrix& X, std::span<const double> y, const TreeParams& params) {
    std::vector<std::size_t> idx(X.rows);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return fit(X, y, std::move(idx), params);
  }

  double predict(std::span<const double> x) const {
    int node = 0;
    while (nodes_[node].feature >= 0) {
      const auto& n = nodes_[node];
      node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[node].value;
  }

  // Index of the leaf reached by x; used to route training rows when auditing splits.
  int leaf_of(std::span<const double> x) const {
    int node = 0;
    while (nodes_[node].feature >= 0) {
      const auto& n = nodes_[node];
      node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return node;
  }

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

  bool operator==(const RegressionTree&) const = default;

 private:
  int grow(const Matrix& X, std::span<const double> y, std::vector<std::size_t>& idx, int depth,
           const TreeParams& params, std::size_t min_leaf, const std::vector<int>& all_features,
           Rng* sampler, std::size_t features_per_split) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double mean = 0.0;
    for (std::size_t i : idx) mean += y[i];
    mean /= static_cast<double>(idx.size());
    double sse = 0.0;
    for (std::size_t i : idx) sse += (y[i] - mean) * (y[i] - mean);
    nodes_[id].value = mean;
    nodes_[id].sse = sse;
    nodes_[id].n_samples = idx.size();

    const bool depth_left = params.max_depth < 0 || depth < params.max_depth;
    if (!depth_left || sse <= 0.0) return id;

    std::vector<int> features;
    if (sampler != nullptr && features_per_split > 0 && features_per_split < all_features.size()) {
      features = all_features;
      for (std::size_t i = 0; i < features_per_split; ++i) {
        std::swap(features[i], features[i + sampler->index(features.size() - i)]);
      }
      features.resize(features_per_split);
      std::sort(features.begin(), features.end());
    } else {
      features = all_features;
    }

    const SplitCandidate split = best_split(X, y, idx, features, min_leaf);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (X(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    std::vector<std::size_t>().swap(idx);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].split_sse = split.sse;
    const int l = grow(X, y, left_idx, depth + 1, params, min_leaf, all_features, sampler, features_per_split);
    const int r = grow(X, y, right_idx, depth + 1, params, min_leaf, all_features, sampler, features_per_split);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<TreeNode> nodes_;
};

}  // namespace pumphi
