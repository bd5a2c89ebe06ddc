#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "pumphi/config.hpp"
#include "pumphi/io.hpp"
#include "support.hpp"

using namespace pumphi;
using namespace testing_support;

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream(path, std::ios::binary) << body;
}

template <typename Fn>
void write_with(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  fn(out);
}

Dataset small_history(std::uint64_t seed = 1) {
  HistoryOptions opt;
  opt.n_assets = 2;
  opt.n_runs_total = 40;
  opt.seed = seed;
  return simulate_history(ChamberConfig{}, default_recipes(), opt);
}

std::vector<ConfigOverride> ini(const std::string& text) {
  std::istringstream in(text);
  return read_ini_overrides(in, "test.ini");
}

}  // namespace

TEST(Numbers, ShortestRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-12, 12));
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_PUMPHI_ERROR(parse_double("1.5x"), Errc::data);
  EXPECT_PUMPHI_ERROR(parse_int<int>(""), Errc::data);
}

TEST(Csv, DatasetRoundTripIsExact) {
  TempDir dir;
  Dataset d = small_history();
  write_with(dir.str("samples.csv"), [&](std::ostream& o) { write_samples(o, d.runs); });
  write_with(dir.str("runs.csv"), [&](std::ostream& o) { write_metadata(o, d.runs); });
  const auto back = read_dataset(dir.str("samples.csv"), dir.str("runs.csv"));
  for (auto& r : d.runs) r.truth.reset();
  ASSERT_EQ(back.size(), d.runs.size());
  EXPECT_EQ(back, d.runs);
}

TEST(Csv, PlanHiAndFeaturesRoundTrip) {
  TempDir dir;
  const Dataset d = small_history(2);
  write_with(dir.str("plan.csv"), [&](std::ostream& o) { write_plan(o, d.plan); });
  EXPECT_EQ(read_plan(dir.str("plan.csv")), d.plan);

  const auto hi = derive_hi(d.runs, default_sensors());
  write_with(dir.str("hi.csv"), [&](std::ostream& o) { write_hi(o, hi.series); });
  const auto hi_back = read_hi(dir.str("hi.csv"));
  EXPECT_EQ(hi_back.entries, hi.series.entries);

  FeatureOptions fo;
  fo.horizon = 3;
  const auto set = build_supervised(d.runs, hi.series, d.plan, default_sensors(), fo);
  write_with(dir.str("features.csv"), [&](std::ostream& o) { write_features(o, set); });
  write_with(dir.str("meta.csv"), [&](std::ostream& o) { write_feature_meta(o, set); });
  const auto back = read_supervised(dir.str("features.csv"), dir.str("meta.csv"));
  EXPECT_EQ(back.names, set.names);
  EXPECT_EQ(back.X, set.X);
  EXPECT_EQ(back.y, set.y);
  EXPECT_EQ(back.meta, set.meta);
  EXPECT_EQ(back.vocab, set.vocab);
  EXPECT_EQ(back.horizon, set.horizon);
}

TEST(Csv, MissingFileIsDataError) {
  TempDir dir;
  EXPECT_PUMPHI_ERROR(read_dataset(dir.str("nope.csv"), dir.str("runs.csv")), Errc::data);
  EXPECT_PUMPHI_ERROR(read_plan(dir.str("nope.csv")), Errc::data);
  EXPECT_PUMPHI_ERROR(read_hi(dir.str("nope.csv")), Errc::data);
}

TEST(Csv, MalformedInputsAreDataErrors) {
  TempDir dir;
  write_file(dir.str("plan.csv"), "asset,position,recipe_id\n0,0,A\n");
  EXPECT_PUMPHI_ERROR(read_plan(dir.str("plan.csv")), Errc::data);
  write_file(dir.str("plan.csv"), "asset_id,position,recipe_id\n0,0\n");
  EXPECT_PUMPHI_ERROR(read_plan(dir.str("plan.csv")), Errc::data);
  write_file(dir.str("plan.csv"), "asset_id,position,recipe_id\nzero,0,A\n");
  EXPECT_PUMPHI_ERROR(read_plan(dir.str("plan.csv")), Errc::data);

  const Dataset d = small_history();
  write_with(dir.str("samples.csv"), [&](std::ostream& o) { write_samples(o, d.runs); });
  std::ostringstream meta;
  write_metadata(meta, d.runs);
  // Duplicate the first metadata row.
  std::string text = meta.str();
  const auto first_end = text.find('\n');
  const auto second_end = text.find('\n', first_end + 1);
  text += text.substr(first_end + 1, second_end - first_end);
  write_file(dir.str("runs.csv"), text);
  EXPECT_PUMPHI_ERROR(read_dataset(dir.str("samples.csv"), dir.str("runs.csv")), Errc::data);
}

TEST(Config, IniParsingAndOverrides) {
  PipelineConfig cfg;
  const auto o = ini("[features]\nhorizon = 5\n[models]\nmodel = rf\nrf_n_trees = 12\n[cli]\nseed = 9\n");
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.horizon, 5u);
  EXPECT_EQ(cfg.model, "rf");
  EXPECT_EQ(cfg.hp.rf.n_trees, 12);
  EXPECT_EQ(cfg.require_seed(), 9u);
  EXPECT_EQ(selected_models(cfg), (std::vector<ModelKind>{ModelKind::rf}));

  // Later overrides win, matching file < --set < flag precedence in the CLI.
  const std::vector<ConfigOverride> later = {parse_override("features.horizon=7"),
                                             parse_override("features.horizon = 8")};
  apply_overrides(cfg, later);
  EXPECT_EQ(cfg.horizon, 8u);
}

TEST(Config, UnknownOrInvalidValuesAreConfigErrors) {
  PipelineConfig cfg;
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[features]\nhorizn = 5\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[nosuch]\nx = 1\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[features]\nhorizon = five\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[features]\ntrain_frac = 1.5\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[models]\nmodel = lstm\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[hi]\nsegments = 0.002:0.03\n")), Errc::config);
  EXPECT_PUMPHI_ERROR(parse_override("horizon=5"), Errc::config);
  EXPECT_PUMPHI_ERROR(read_ini_file("/nonexistent/pumphi.ini"), Errc::config);
  EXPECT_PUMPHI_ERROR(PipelineConfig{}.require_seed(), Errc::config);
}

TEST(Config, RecipeListControlsRecipeKeys) {
  PipelineConfig cfg;
  apply_overrides(cfg, ini("[simgen]\nrecipe_X_probability = 1\nrecipes = A, X\n"));
  ASSERT_EQ(cfg.recipes.size(), 2u);
  EXPECT_EQ(cfg.recipes[0].recipe_id, "A");
  EXPECT_EQ(cfg.recipes[0].deposition_weight, default_recipes()[0].deposition_weight);
  EXPECT_EQ(cfg.recipes[1].recipe_id, "X");
  EXPECT_EQ(cfg.recipes[1].probability, 1.0);
  EXPECT_PUMPHI_ERROR(apply_overrides(cfg, ini("[simgen]\nrecipe_B_probability = 1\n")), Errc::config);
}

TEST(Config, SegmentsRoundTripThroughText) {
  PipelineConfig cfg;
  apply_overrides(cfg, ini("[hi]\nsegments = 0.5:0.1, 0.1:0.01\n"));
  ASSERT_EQ(cfg.segments.size(), 2u);
  EXPECT_EQ(cfg.segments[1].index, 2);
  EXPECT_EQ(cfg.segments[1].upper, 0.1);
  EXPECT_EQ(cfg.segments[1].lower, 0.01);
  PipelineConfig again;
  apply_overrides(again, std::vector<ConfigOverride>{{"hi", "segments", detail::format_segments(cfg.segments)}});
  EXPECT_EQ(effective_config(again), effective_config(cfg));
}

TEST(Config, EffectiveConfigAndHash) {
  PipelineConfig a;
  const std::string text = effective_config(a);
  EXPECT_NE(text.find("[simgen]"), std::string::npos);
  EXPECT_NE(text.find("horizon = 10"), std::string::npos);
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_EQ(config_hash(a), config_hash(PipelineConfig{}));

  // The printed config parses back to the same configuration.
  PipelineConfig parsed;
  std::istringstream in(effective_config(a, true));
  apply_overrides(parsed, read_ini_overrides(in, "effective"));
  EXPECT_EQ(config_hash(parsed), config_hash(a));

  PipelineConfig b = a;
  b.threads = 8;
  b.out_dir = "elsewhere";
  b.dump_predictions = true;
  EXPECT_EQ(config_hash(b), config_hash(a));
  b.horizon = 11;
  EXPECT_NE(config_hash(b), config_hash(a));
  PipelineConfig c = a;
  c.seed = 3;
  EXPECT_NE(config_hash(c), config_hash(a));
}
