#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/random.hpp"

namespace pumphi {

struct MlpParams {
  std::size_t hidden_units = 64;
  int epochs = 200;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

// One hidden ReLU layer, linear output, trained on mean squared error with Adam
// mini-batch updates. Targets are z-scored internally; predictions are mapped back.
//
// Parameter layout (flat): W1 [hidden x inputs] row-major, b1 [hidden], w2 [hidden], b2.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::size_t inputs, std::size_t hidden, std::vector<double> params, double y_mean,
      double y_scale)
      : inputs_(inputs), hidden_(hidden), params_(std::move(params)), y_mean_(y_mean), y_scale_(y_scale) {}

  static std::size_t param_count(std::size_t inputs, std::size_t hidden) {
    return hidden * inputs + 2 * hidden + 1;
  }

  // Glorot-uniform weights, zero biases.
  static std::vector<double> init_params(std::size_t inputs, std::size_t hidden, Rng& rng) {
    std::vector<double> p(param_count(inputs, hidden), 0.0);
    const double a1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
    for (std::size_t i = 0; i < hidden * inputs; ++i) p[i] = rng.uniform(-a1, a1);
    const std::size_t w2 = hidden * inputs + hidden;
    for (std::size_t i = 0; i < hidden; ++i) p[w2 + i] = rng.uniform(-a2, a2);
    return p;
  }

  // Mean squared error over the rows `batch` of X against `target`, and its
  // gradient with respect to the flat parameter vector.
  static double loss_and_gradient(std::span<const double> params, std::size_t inputs,
                                  std::size_t hidden, const Matrix& X, std::span<const double> target,
                                  std::span<const std::size_t> batch, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    const double* W1 = params.data();
    const double* b1 = W1 + hidden * inputs;
    const double* w2 = b1 + hidden;
    const double b2 = w2[hidden];
    double* gW1 = grad.data();
    double* gb1 = gW1 + hidden * inputs;
    double* gw2 = gb1 + hidden;
    double& gb2 = gw2[hidden];

    std::vector<double> pre(hidden), act(hidden);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (std::size_t r : batch) {
      const auto x = X.row(r);
      double out = b2;
      for (std::size_t h = 0; h < hidden; ++h) {
        double z = b1[h];
        const double* w = W1 + h * inputs;
        for (std::size_t j = 0; j < inputs; ++j) z += w[j] * x[j];
        pre[h] = z;
        act[h] = z > 0.0 ? z : 0.0;
        out += w2[h] * act[h];
      }
      const double err = out - target[r];
      loss += err * err * inv_b;
      const double d_out = 2.0 * err * inv_b;
      gb2 += d_out;
      for (std::size_t h = 0; h < hidden; ++h) {
        gw2[h] += d_out * act[h];
        if (pre[h] <= 0.0) continue;
        const double d_pre = d_out * w2[h];
        gb1[h] += d_pre;
        double* g = gW1 + h * inputs;
        for (std::size_t j = 0; j < inputs; ++j) g[j] += d_pre * x[j];
      }
    }
    return loss;
  }

  static Mlp fit(const Matrix& X, std::span<const double> y, const MlpParams& params) {
    require(X.rows > 0, Errc::empty_training, "mlp needs at least one row");
    require(params.hidden_units >= 1 && params.epochs >= 0 && params.batch_size >= 1 &&
                params.learning_rate > 0.0,
            Errc::config, "invalid mlp hyperparameters");
    const std::size_t n = X.rows, m = X.cols, h = params.hidden_units;

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double scale = sd > 0.0 ? sd : 1.0;
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = (y[i] - mean) / scale;

    Rng rng(params.seed);
    std::vector<double> p = init_params(m, h, rng);
    if (sd == 0.0) {
      // Nothing to learn: silence the output layer so predictions are the constant.
      std::fill(p.begin() + static_cast<std::ptrdiff_t>(h * m + h), p.end(), 0.0);
      return Mlp(m, h, std::move(p), mean, scale);
    }
    std::vector<double> grad(p.size()), m1(p.size(), 0.0), m2(p.size(), 0.0);
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double beta1_t = 1.0, beta2_t = 1.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0; start < n; start += params.batch_size) {
        const std::size_t end = std::min(n, start + params.batch_size);
        const std::span<const std::size_t> batch(order.data() + start, end - start);
        const double loss = loss_and_gradient(p, m, h, X, target, batch, grad);
        if (!std::isfinite(loss)) {
          fail(Errc::diverged_loss, "mlp loss became non-finite in epoch " + std::to_string(epoch));
        }
        beta1_t *= beta1;
        beta2_t *= beta2;
        for (std::size_t i = 0; i < p.size(); ++i) {
          m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
          m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
          const double mhat = m1[i] / (1.0 - beta1_t);
          const double vhat = m2[i] / (1.0 - beta2_t);
          p[i] -= params.learning_rate * mhat / (std::sqrt(vhat) + eps);
        }
      }
    }
    return Mlp(m, h, std::move(p), mean, scale);
  }

  double predict(std::span<const double> x) const {
    const double* W1 = params_.data();
    const double* b1 = W1 + hidden_ * inputs_;
    const double* w2 = b1 + hidden_;
    double out = w2[hidden_];
    for (std::size_t h = 0; h < hidden_; ++h) {
      double z = b1[h];
      const double* w = W1 + h * inputs_;
      for (std::size_t j = 0; j < inputs_; ++j) z += w[j] * x[j];
      if (z > 0.0) out += w2[h] * z;
    }
    return y_mean_ + y_scale_ * out;
  }

  std::size_t inputs() const noexcept { return inputs_; }
  std::size_t hidden() const noexcept { return hidden_; }
  const std::vector<double>& params() const noexcept { return params_; }
  double y_mean() const noexcept { return y_mean_; }
  double y_scale() const noexcept { return y_scale_; }

  bool operator==(const Mlp&) const = default;

 private:
  std::size_t inputs_ = 0;
  std::size_t hidden_ = 0;
  std::vector<double> params_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

}  // namespace pumphi
