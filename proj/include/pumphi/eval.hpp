#pragma once

// MAE scoring of fitted models and benchmarks on one test split, and the
// report.json / predictions.csv / plot_hi.csv writers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/io.hpp"
#include "pumphi/models/benchmarks.hpp"
#include "pumphi/models/regressor.hpp"
#include "pumphi/parallel.hpp"

namespace pumphi {

inline double mae(std::span<const double> y, std::span<const double> y_hat) {
  require(y.size() == y_hat.size(), Errc::length_mismatch,
          "mae: " + std::to_string(y.size()) + " targets vs " + std::to_string(y_hat.size()) +
              " predictions");
  require(!y.empty(), Errc::empty, "mae of an empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

// Environment-free description of the evaluated data; no paths, no timings.
struct DatasetFingerprint {
  std::size_t n_rows = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t n_features = 0;
  std::size_t horizon = 0;
  double train_frac = 0.0;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct ModelScore {
  std::string model;
  std::optional<double> mae;  // empty for placeholders
  std::string status;         // "ok" or "not implemented"
  std::vector<double> predictions;
};

struct EvalReport {
  DatasetFingerprint dataset;
  std::vector<ModelScore> results;  // fitted models by MAE ascending, then placeholders
  double bm1 = 0.0, bm2 = 0.0, bm3 = 0.0;
  std::vector<double> bm1_pred, bm2_pred, bm3_pred;
  std::vector<double> targets;
  std::vector<RowMeta> meta;
  std::vector<std::pair<std::string, std::string>> hyperparameters;  // as configured

  const ModelScore* best() const {
    return results.empty() || !results.front().mae ? nullptr : &results.front();
  }
};

// Models named in the report but deliberately not implemented.
inline const std::vector<std::string>& placeholder_models() {
  static const std::vector<std::string> names = {"lstm"};
  return names;
}

inline EvalReport evaluate_all(std::span<const FittedModel> models, const Benchmarks& benchmarks,
                               const SupervisedSet& test, unsigned threads = 1) {
  require(test.size() > 0, Errc::empty, "test set is empty");
  EvalReport report;
  report.targets = test.y;
  report.meta = test.meta;

  std::vector<ModelScore> scores(models.size());
  parallel_for(models.size(), threads, [&](std::size_t i) {
    const auto& m = models[i];
    require(m.feature_names == test.names, Errc::model,
            std::string("model ") + model_name(m.kind) + " was trained on a different feature layout");
    scores[i].model = model_name(m.kind);
    scores[i].predictions = m.predict(test.X);
    scores[i].mae = mae(test.y, scores[i].predictions);
    scores[i].status = "ok";
  });
  std::stable_sort(scores.begin(), scores.end(),
                   [](const ModelScore& a, const ModelScore& b) { return *a.mae < *b.mae; });
  report.results = std::move(scores);
  for (const auto& name : placeholder_models()) report.results.push_back({name, std::nullopt, "not implemented", {}});

  report.bm1_pred = benchmarks.predict(BenchmarkKind::bm1, test);
  report.bm2_pred = benchmarks.predict(BenchmarkKind::bm2, test);
  report.bm3_pred = benchmarks.predict(BenchmarkKind::bm3, test);
  report.bm1 = mae(test.y, report.bm1_pred);
  report.bm2 = mae(test.y, report.bm2_pred);
  report.bm3 = mae(test.y, report.bm3_pred);

  // Persistence MAE is, by definition, the mean absolute h-step change of the HI.
  double step_change = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) step_change += std::abs(test.y[i] - test.meta[i].hi_now);
  step_change /= static_cast<double>(test.size());
  require(step_change == report.bm1, Errc::data, "bm1 disagrees with the h-step HI change");
  require(std::all_of(report.bm3_pred.begin(), report.bm3_pred.end(),
                      [&](double v) { return v == report.bm3_pred.front(); }),
          Errc::data, "bm3 predictions are not constant");
  return report;
}

inline nlohmann::ordered_json report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  const auto& d = r.dataset;
  j["dataset"] = {{"n_rows", d.n_rows},         {"n_train", d.n_train},   {"n_test", d.n_test},
                  {"n_features", d.n_features}, {"horizon", d.horizon},   {"train_frac", d.train_frac},
                  {"seed", d.seed},             {"config_hash", d.config_hash}};
  auto results = nlohmann::ordered_json::array();
  for (const auto& s : r.results) {
    nlohmann::ordered_json row;
    row["model"] = s.model;
    row["mae"] = s.mae ? nlohmann::ordered_json(*s.mae) : nlohmann::ordered_json(nullptr);
    row["status"] = s.status;
    results.push_back(std::move(row));
  }
  j["results"] = std::move(results);
  j["benchmarks"] = {{"bm1", r.bm1}, {"bm2", r.bm2}, {"bm3", r.bm3}};
  auto hp = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.hyperparameters) hp[k] = v;
  j["hyperparameters"] = std::move(hp);
  return j;
}

inline void write_report(std::ostream& out, const EvalReport& r) { out << report_json(r).dump(2) << '\n'; }

// One line per (test row, model or benchmark).
inline void write_predictions(std::ostream& out, const EvalReport& r) {
  out << "run_id,target,model,prediction\n";
  std::string line;
  auto emit = [&](const std::string& name, const std::vector<double>& pred) {
    for (std::size_t i = 0; i < pred.size(); ++i) {
      line.clear();
      append_int(line, r.meta[i].run_id);
      line += ',';
      append_double(line, r.targets[i]);
      line += ',' + name + ',';
      append_double(line, pred[i]);
      out << line << '\n';
    }
  };
  for (const auto& s : r.results) {
    if (s.mae) emit(s.model, s.predictions);
  }
  emit("bm1", r.bm1_pred);
  emit("bm2", r.bm2_pred);
  emit("bm3", r.bm3_pred);
}

// Time series of the test period: forecast origin (start_time, n_runs), the target
// HI ten runs later, the best model's forecast, and the three benchmarks.
inline void write_plot_data(std::ostream& out, const EvalReport& r) {
  out << "start_time,n_runs,target,prediction_best,bm1,bm2,bm3\n";
  const ModelScore* best = r.best();
  std::string line;
  for (std::size_t i = 0; i < r.targets.size(); ++i) {
    line.clear();
    append_double(line, r.meta[i].start_time);
    line += ',';
    append_int(line, r.meta[i].n_runs);
    line += ',';
    append_double(line, r.targets[i]);
    line += ',';
    if (best) append_double(line, best->predictions[i]);
    for (const auto* v : {&r.bm1_pred, &r.bm2_pred, &r.bm3_pred}) {
      line += ',';
      append_double(line, (*v)[i]);
    }
    out << line << '\n';
  }
}

}  // namespace pumphi
