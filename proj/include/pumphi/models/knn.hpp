#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"

namespace pumphi {

// Brute-force k-nearest-neighbour regression on Euclidean distance. Equal
// distances are ordered by training row index.
class KnnRegressor {
 public:
  KnnRegressor() = default;

  static KnnRegressor fit(Matrix X, std::vector<double> y, std::size_t k) {
    require(X.rows > 0, Errc::empty_training, "knn needs at least one row");
    require(k >= 1, Errc::config, "k must be >= 1");
    require(k <= X.rows, Errc::k_too_large,
            "k=" + std::to_string(k) + " exceeds " + std::to_string(X.rows) + " training rows");
    KnnRegressor m;
    m.X_ = std::move(X);
    m.y_ = std::move(y);
    m.k_ = k;
    return m;
  }

  double predict(std::span<const double> x) const {
    std::vector<std::pair<double, std::size_t>> dist(X_.rows);
    for (std::size_t i = 0; i < X_.rows; ++i) {
      const auto row = X_.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < row.size(); ++j) d += (row[j] - x[j]) * (row[j] - x[j]);
      dist[i] = {d, i};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1), dist.end());
    std::sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_));
    double sum = 0.0;
    for (std::size_t i = 0; i < k_; ++i) sum += y_[dist[i].second];
    return sum / static_cast<double>(k_);
  }

  std::size_t k() const noexcept { return k_; }
  const Matrix& train_x() const noexcept { return X_; }
  const std::vector<double>& train_y() const noexcept { return y_; }

  bool operator==(const KnnRegressor&) const = default;

 private:
  Matrix X_;
  std::vector<double> y_;
  std::size_t k_ = 1;
};

}  // namespace pumphi
