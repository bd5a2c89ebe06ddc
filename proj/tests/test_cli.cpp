#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Result run(const TempDir& scratch, const std::string& args) {
  const auto out = scratch.path() / "stdout.txt";
  const auto err = scratch.path() / "stderr.txt";
  const std::string cmd =
      std::string(PUMPHI_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

const char* kSmall = "--n-assets 2 --n-runs 100 --horizon 1 --model all --rf-trees 10 --mlp-epochs 20";

std::vector<std::string> listing(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST(Cli, MissingSeedIsConfigError) {
  TempDir t;
  const auto r = run(t, "pipeline --out " + t.str("out"));
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(r.err.rfind("error ConfigError ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_FALSE(fs::exists(t.path() / "out"));
}

TEST(Cli, UnknownKeyAndBadFlagsAreConfigErrors) {
  TempDir t;
  EXPECT_EQ(run(t, "simulate --seed 1 --set simgen.nope=3 --out " + t.str("o")).status, 2);
  EXPECT_EQ(run(t, "simulate --seed 1 --n-runs many --out " + t.str("o")).status, 2);
  EXPECT_EQ(run(t, "simulate --seed 1 --frobnicate --out " + t.str("o")).status, 2);
  EXPECT_EQ(run(t, "simulate --seed 1 --config " + t.str("missing.ini")).status, 2);
}

TEST(Cli, MissingInputIsDataErrorWithoutPartialOutputs) {
  TempDir t;
  fs::create_directories(t.path() / "empty");
  const auto r = run(t, "derive-hi --seed 1 --in " + t.str("empty") + " --out " + t.str("out"));
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(r.err.rfind("error DataError ", 0), 0u) << r.err;
  EXPECT_FALSE(fs::exists(t.path() / "out"));

  // A failing stage leaves an existing output directory exactly as it was.
  fs::create_directories(t.path() / "keep");
  std::ofstream(t.path() / "keep" / "hi.csv") << "sentinel\n";
  EXPECT_EQ(run(t, "derive-hi --seed 1 --in " + t.str("empty") + " --out " + t.str("keep")).status, 3);
  EXPECT_EQ(listing(t.path() / "keep"), std::vector<std::string>{"hi.csv"});
  EXPECT_EQ(slurp(t.path() / "keep" / "hi.csv"), "sentinel\n");
}

TEST(Cli, PipelineSmokeRun) {
  TempDir t;
  const auto r = run(t, std::string("pipeline --seed 3 --dump-predictions ") + kSmall + " --out " + t.str("out"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::vector<std::string> expected = {
      "dt.model",     "features.csv",   "fits.csv",      "ground_truth.csv", "hi.csv",
      "knn.model",    "meta.csv",       "mlp.model",     "plan.csv",         "plot_hi.csv",
      "predictions.csv", "report.json", "rf.model",      "runs.csv",         "samples.csv",
      "svr.model"};
  auto sorted = expected;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(listing(t.path() / "out"), sorted);
  // Effective configuration first, then results.
  EXPECT_EQ(r.out.rfind("; pumphi pipeline effective configuration", 0), 0u);
  EXPECT_NE(r.out.find("[features]\nhorizon = 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("seed = 3"), std::string::npos);
  EXPECT_NE(r.out.find("bm1"), std::string::npos);
  const std::string report = slurp(t.path() / "out" / "report.json");
  EXPECT_NE(report.find("\"lstm\""), std::string::npos);
  EXPECT_NE(report.find("\"horizon\": 1"), std::string::npos);
}

TEST(Cli, StandaloneStagesReproducePipeline) {
  TempDir t;
  std::ofstream(t.path() / "run.ini") << "[cli]\nseed = 5\n"
                                      << "[simgen]\nn_assets = 2\nn_runs_total = 100\n"
                                      << "[features]\nhorizon = 1\n"
                                      << "[models]\nrf_n_trees = 10\nmlp_epochs = 20\n";
  const std::string cfg = " --config " + t.str("run.ini");
  ASSERT_EQ(run(t, "pipeline" + cfg + " --out " + t.str("all")).status, 0);

  const std::string dir = " --out " + t.str("staged");
  for (const char* stage : {"simulate", "derive-hi", "build-features", "train", "evaluate"}) {
    const auto r = run(t, stage + cfg + dir);
    ASSERT_EQ(r.status, 0) << stage << ": " << r.err;
  }
  const auto names = listing(t.path() / "all");
  EXPECT_EQ(listing(t.path() / "staged"), names);
  for (const auto& name : names) {
    EXPECT_EQ(slurp(t.path() / "staged" / name), slurp(t.path() / "all" / name)) << name;
  }
}

TEST(Cli, CorruptModelIsModelError) {
  TempDir t;
  const std::string dir = t.str("m");
  ASSERT_EQ(run(t, std::string("pipeline --seed 2 ") + kSmall + " --out " + dir).status, 0);
  std::ofstream(t.path() / "m" / "dt.model") << "pumphi-model 1\nkind dt\nseed x\n";
  const auto r = run(t, "evaluate --seed 2 --horizon 1 --model dt --out " + dir);
  EXPECT_EQ(r.status, 4);
  EXPECT_EQ(r.err.rfind("error ModelError ", 0), 0u) << r.err;
}

TEST(Cli, ThreadCountDoesNotChangeArtifacts) {
  TempDir t;
  ASSERT_EQ(run(t, std::string("pipeline --seed 4 --threads 1 ") + kSmall + " --out " + t.str("a")).status, 0);
  ASSERT_EQ(run(t, std::string("pipeline --seed 4 --threads 8 ") + kSmall + " --out " + t.str("b")).status, 0);
  for (const auto& name : listing(t.path() / "a")) {
    EXPECT_EQ(slurp(t.path() / "a" / name), slurp(t.path() / "b" / name)) << name;
  }
}
