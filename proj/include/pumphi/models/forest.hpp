#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/models/tree.hpp"
#include "pumphi/parallel.hpp"
#include "pumphi/random.hpp"

namespace pumphi {

struct ForestParams {
  int n_trees = 100;
  int max_depth = 8;
  int min_samples_leaf = 5;
  std::size_t features_per_split = 0;  // 0 = ceil(m / 3)
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

class RandomForest {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<RegressionTree> trees) : trees_(std::move(trees)) {}

  // Tree t draws its bootstrap and split features from substream (seed, t), so the
  // fitted forest does not depend on the thread count.
  static RandomForest fit(const Matrix& X, std::span<const double> y, const ForestParams& params,
                          unsigned threads = 1) {
    require(X.rows > 0, Errc::empty_training, "random forest needs at least one row");
    require(params.n_trees >= 1, Errc::config, "n_trees must be >= 1");
    std::size_t mtry = params.features_per_split;
    if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(static_cast<double>(X.cols) / 3.0));
    mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(1, X.cols));
    const TreeParams tp{params.max_depth, params.min_samples_leaf};

    RandomForest forest;
    forest.trees_.resize(static_cast<std::size_t>(params.n_trees));
    parallel_for(forest.trees_.size(), threads, [&](std::size_t t) {
      Rng rng = Rng::substream(params.seed, t);
      std::vector<std::size_t> idx(X.rows);
      if (params.bootstrap) {
        for (auto& i : idx) i = rng.index(X.rows);
      } else {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
      }
      forest.trees_[t] = RegressionTree::fit(X, y, std::move(idx), tp, &rng, mtry);
    });
    return forest;
  }

  double predict(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(x);
    return sum / static_cast<double>(trees_.size());
  }

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

  bool operator==(const RandomForest&) const = default;

 private:
  std::vector<RegressionTree> trees_;
};

}  // namespace pumphi
