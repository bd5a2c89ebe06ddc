#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"

namespace pumphi {

struct SvrParams {
  double epsilon = 0.5;
  double reg_lambda = 1e-4;
  int steps = 10000;
  double step_size = 0.1;
  std::uint64_t seed = 0;
};

// Linear epsilon-insensitive support vector regression,
//   min_w,b  lambda |w|^2 + (1/n) sum max(0, |y - w.x - b| - epsilon),
// by full-batch subgradient descent with step step_size / sqrt(1 + t).
// Starts from w = 0, b = mean(y); the final iterate is returned. The objective has
// no random component, so the seed is only carried for bookkeeping.
class LinearSvr {
 public:
  LinearSvr() = default;
  LinearSvr(std::vector<double> w, double b) : w_(std::move(w)), b_(b) {}

  static LinearSvr fit(const Matrix& X, std::span<const double> y, const SvrParams& params) {
    require(X.rows > 0, Errc::empty_training, "svr needs at least one row");
    require(params.epsilon >= 0.0 && params.reg_lambda >= 0.0 && params.steps >= 0 &&
                params.step_size > 0.0,
            Errc::config, "invalid svr hyperparameters");
    const std::size_t n = X.rows, m = X.cols;
    LinearSvr model;
    model.w_.assign(m, 0.0);
    double mean = 0.0;
    for (double v : y) mean += v;
    model.b_ = mean / static_cast<double>(n);

    std::vector<double> grad_w(m);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int step = 0; step < params.steps; ++step) {
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        double pred = model.b_;
        for (std::size_t j = 0; j < m; ++j) pred += model.w_[j] * x[j];
        const double r = y[i] - pred;
        if (std::abs(r) <= params.epsilon) continue;
        const double s = r > 0.0 ? -1.0 : 1.0;  // d/dpred of |r|
        for (std::size_t j = 0; j < m; ++j) grad_w[j] += s * x[j];
        grad_b += s;
      }
      const double eta = params.step_size / std::sqrt(1.0 + static_cast<double>(step));
      for (std::size_t j = 0; j < m; ++j) {
        model.w_[j] -= eta * (2.0 * params.reg_lambda * model.w_[j] + inv_n * grad_w[j]);
      }
      model.b_ -= eta * inv_n * grad_b;
    }
    return model;
  }

  double predict(std::span<const double> x) const {
    double pred = b_;
    for (std::size_t j = 0; j < w_.size(); ++j) pred += w_[j] * x[j];
    return pred;
  }

  const std::vector<double>& weights() const noexcept { return w_; }
  double bias() const noexcept { return b_; }

  bool operator==(const LinearSvr&) const = default;

 private:
  std::vector<double> w_;
  double b_ = 0.0;
};

}  // namespace pumphi
