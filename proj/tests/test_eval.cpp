#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pumphi/eval.hpp"
#include "support.hpp"

using namespace pumphi;
using namespace testing_support;

namespace {

SupervisedSet dataset(Rng& rng, std::size_t n) {
  auto s = make_set(random_matrix(rng, n, 3), {});
  for (std::size_t i = 0; i < n; ++i) {
    s.y.push_back(20.0 + 4.0 * s.X(i, 0) + rng.normal());
    s.meta[i].run_id = static_cast<std::int64_t>(i + 1);
    s.meta[i].start_time = double(i);
    s.meta[i].n_runs = int(i % 100);
    s.meta[i].target_n_runs = int((i + 10) % 100);
    s.meta[i].hi_now = s.y[i] - rng.uniform(-2, 2);
  }
  return s;
}

FittedModel memorizer(const SupervisedSet& rows) {
  // 1-NN on its own evaluation rows: every prediction is exact.
  FittedModel m;
  m.kind = ModelKind::knn;
  m.feature_names = rows.names;
  m.state = KnnRegressor::fit(rows.X, rows.y, 1);
  return m;
}

}  // namespace

TEST(Mae, Examples) {
  EXPECT_DOUBLE_EQ(mae(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(mae(std::vector<double>{0, 0}, std::vector<double>{1, -3}), 2.0);
  EXPECT_PUMPHI_ERROR(mae(std::vector<double>{1}, std::vector<double>{1, 2}), Errc::length_mismatch);
  EXPECT_PUMPHI_ERROR(mae(std::vector<double>{}, std::vector<double>{}), Errc::empty);
}

TEST(Mae, MatchesOracleAndIsSymmetric) {
  Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(1 + rng.index(500)), b(a.size());
    for (auto& v : a) v = rng.uniform(-100, 100);
    for (auto& v : b) v = rng.uniform(-100, 100);
    long double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::fabs(static_cast<long double>(a[i]) - b[i]);
    const double oracle = static_cast<double>(sum / a.size());
    EXPECT_NEAR(mae(a, b), oracle, 1e-12 * std::max(1.0, oracle));
    EXPECT_EQ(mae(a, b), mae(b, a));
    EXPECT_GE(mae(a, b), 0.0);
  }
}

TEST(EvaluateAll, RanksByMaeAndAppendsPlaceholder) {
  Rng rng(3);
  const auto train = dataset(rng, 200);
  const auto test = dataset(rng, 60);
  ModelHyperparams hp;
  hp.rf.n_trees = 10;
  std::vector<FittedModel> models = {fit_model(ModelKind::svr, hp, train, 1), memorizer(test),
                                     fit_model(ModelKind::dt, hp, train, 1)};
  const auto b = Benchmarks::fit(train);
  const auto r = evaluate_all(models, b, test);
  ASSERT_EQ(r.results.size(), 4u);
  EXPECT_EQ(r.results[0].model, "knn");
  EXPECT_EQ(*r.results[0].mae, 0.0);
  EXPECT_LE(*r.results[1].mae, *r.results[2].mae);
  EXPECT_EQ(r.results[3].model, "lstm");
  EXPECT_FALSE(r.results[3].mae.has_value());
  EXPECT_EQ(r.results[3].status, "not implemented");
  EXPECT_EQ(r.best(), &r.results[0]);
}

TEST(EvaluateAll, BenchmarkIdentities) {
  Rng rng(4);
  const auto train = dataset(rng, 100);
  const auto test = dataset(rng, 40);
  const auto r = evaluate_all({}, Benchmarks::fit(train), test);
  double step = 0;
  for (std::size_t i = 0; i < test.size(); ++i) step += std::abs(test.y[i] - test.meta[i].hi_now);
  EXPECT_NEAR(r.bm1, step / test.size(), 1e-12);
  double mean = 0;
  for (double v : train.y) mean += v;
  mean /= train.size();
  for (double v : r.bm3_pred) EXPECT_NEAR(v, mean, 1e-12);
  EXPECT_EQ(r.bm2, mae(test.y, Benchmarks::fit(train).predict(BenchmarkKind::bm2, test)));
  EXPECT_EQ(r.best(), nullptr);
}

TEST(EvaluateAll, IsPure) {
  Rng rng(5);
  const auto train = dataset(rng, 100);
  const auto test = dataset(rng, 30);
  ModelHyperparams hp;
  hp.rf.n_trees = 8;
  const std::vector<FittedModel> models = {fit_model(ModelKind::rf, hp, train, 2),
                                           fit_model(ModelKind::knn, hp, train, 2)};
  const auto b = Benchmarks::fit(train);
  const auto a = evaluate_all(models, b, test);
  const auto c = evaluate_all(models, b, test, 4);
  std::ostringstream ja, jc;
  write_report(ja, a);
  write_report(jc, c);
  EXPECT_EQ(ja.str(), jc.str());
  std::ostringstream pa, pc;
  write_predictions(pa, a);
  write_predictions(pc, c);
  EXPECT_EQ(pa.str(), pc.str());
}

TEST(EvaluateAll, FeatureLayoutMismatchIsModelError) {
  Rng rng(6);
  const auto train = dataset(rng, 50);
  auto test = dataset(rng, 20);
  const std::vector<FittedModel> models = {fit_model(ModelKind::dt, {}, train, 0)};
  test.names[1] = "other";
  EXPECT_PUMPHI_ERROR(evaluate_all(models, Benchmarks::fit(train), test), Errc::model);
  EXPECT_PUMPHI_ERROR(evaluate_all(models, Benchmarks::fit(train), make_set(Matrix(0, 3), {})), Errc::empty);
}

TEST(Report, JsonShape) {
  Rng rng(7);
  const auto train = dataset(rng, 80);
  const auto test = dataset(rng, 25);
  const std::vector<FittedModel> models = {fit_model(ModelKind::dt, {}, train, 0)};
  auto r = evaluate_all(models, Benchmarks::fit(train), test);
  r.dataset = {105, 80, 25, 3, 10, 0.7, 42, "00ff"};
  r.hyperparameters = {{"model", "dt"}};
  std::ostringstream out;
  write_report(out, r);
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_EQ(j["dataset"]["n_test"], 25);
  EXPECT_EQ(j["dataset"]["seed"], 42);
  EXPECT_EQ(j["dataset"]["config_hash"], "00ff");
  ASSERT_EQ(j["results"].size(), 2u);
  EXPECT_EQ(j["results"][0]["model"], "dt");
  EXPECT_EQ(j["results"][0]["mae"].get<double>(), *r.results[0].mae);
  EXPECT_TRUE(j["results"][1]["mae"].is_null());
  EXPECT_EQ(j["benchmarks"]["bm1"].get<double>(), r.bm1);
  EXPECT_EQ(j["hyperparameters"]["model"], "dt");
  // Key order is fixed.
  const auto ordered = nlohmann::ordered_json::parse(out.str());
  std::vector<std::string> ordered_keys;
  for (auto it = ordered.begin(); it != ordered.end(); ++it) ordered_keys.push_back(it.key());
  EXPECT_EQ(ordered_keys, (std::vector<std::string>{"dataset", "results", "benchmarks", "hyperparameters"}));
}

TEST(Report, PredictionsAndPlotLayout) {
  Rng rng(8);
  const auto train = dataset(rng, 60);
  const auto test = dataset(rng, 12);
  const std::vector<FittedModel> models = {fit_model(ModelKind::dt, {}, train, 0)};
  const auto r = evaluate_all(models, Benchmarks::fit(train), test);
  std::ostringstream pred, plot;
  write_predictions(pred, r);
  write_plot_data(plot, r);
  std::istringstream p(pred.str()), q(plot.str());
  std::string line;
  int lines = 0;
  std::getline(p, line);
  EXPECT_EQ(line, "run_id,target,model,prediction");
  while (std::getline(p, line)) ++lines;
  EXPECT_EQ(lines, 12 * 4);
  std::getline(q, line);
  EXPECT_EQ(line, "start_time,n_runs,target,prediction_best,bm1,bm2,bm3");
  lines = 0;
  while (std::getline(q, line)) ++lines;
  EXPECT_EQ(lines, 12);
}
