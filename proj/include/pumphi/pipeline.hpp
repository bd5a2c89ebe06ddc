#pragma once

// Pipeline stages behind the CLI subcommands. Each stage writes into an
// OutputSet: files go to hidden temporaries and are renamed into place only when
// the whole command succeeded, so a failure never leaves partial artifacts.

#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "pumphi/config.hpp"
#include "pumphi/eval.hpp"
#include "pumphi/features.hpp"
#include "pumphi/hi.hpp"
#include "pumphi/io.hpp"
#include "pumphi/models/benchmarks.hpp"
#include "pumphi/models/regressor.hpp"
#include "pumphi/simgen.hpp"

namespace pumphi {

namespace files {
inline constexpr const char* samples = "samples.csv";
inline constexpr const char* runs = "runs.csv";
inline constexpr const char* ground_truth = "ground_truth.csv";
inline constexpr const char* plan = "plan.csv";
inline constexpr const char* fits = "fits.csv";
inline constexpr const char* hi = "hi.csv";
inline constexpr const char* features = "features.csv";
inline constexpr const char* meta = "meta.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* predictions = "predictions.csv";
inline constexpr const char* plot = "plot_hi.csv";
inline std::string model(ModelKind k) { return std::string(model_name(k)) + ".model"; }
}  // namespace files

class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  ~OutputSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& [tmp, final] : pending_) std::filesystem::remove(tmp, ec);
    if (created_dir_) std::filesystem::remove(dir_, ec);  // only succeeds when empty
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    ensure_dir();
    const auto final_path = dir_ / name;
    const auto tmp = dir_ / ("." + name + ".partial");
    pending_.emplace_back(tmp, final_path);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), Errc::data, "cannot write " + tmp.string());
    body(out);
    out.flush();
    require(static_cast<bool>(out), Errc::data, "failed writing " + final_path.string());
  }

  void commit() {
    for (const auto& [tmp, final] : pending_) std::filesystem::rename(tmp, final);
    committed_ = true;
  }

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  void ensure_dir() {
    if (std::filesystem::exists(dir_)) {
      require(std::filesystem::is_directory(dir_), Errc::config, dir_.string() + " is not a directory");
      return;
    }
    std::filesystem::create_directories(dir_);
    created_dir_ = true;
  }

  std::filesystem::path dir_;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> pending_;
  bool committed_ = false;
  bool created_dir_ = false;
};

inline std::string input_path(const PipelineConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.input_dir()) / name).string();
}

// --- simulate -------------------------------------------------------------

inline Dataset stage_simulate(const PipelineConfig& cfg, OutputSet& out) {
  Dataset data = simulate_history(cfg.chamber, cfg.recipes, history_options(cfg));
  out.write(files::samples, [&](std::ostream& o) { write_samples(o, data.runs); });
  out.write(files::runs, [&](std::ostream& o) { write_metadata(o, data.runs); });
  out.write(files::ground_truth, [&](std::ostream& o) { write_ground_truth(o, data.runs); });
  out.write(files::plan, [&](std::ostream& o) { write_plan(o, data.plan); });
  return data;
}

inline std::vector<RunRecord> load_runs(const PipelineConfig& cfg) {
  return read_dataset(input_path(cfg, files::samples), input_path(cfg, files::runs));
}

// --- derive-hi ------------------------------------------------------------

inline HiDerivation stage_derive_hi(const PipelineConfig& cfg, std::span<const RunRecord> runs,
                                    OutputSet& out) {
  HiDerivation d = derive_hi(runs, cfg.chamber.sensors, hi_options(cfg));
  out.write(files::fits, [&](std::ostream& o) { write_fits(o, d.fits); });
  out.write(files::hi, [&](std::ostream& o) { write_hi(o, d.series); });
  return d;
}

// --- build-features -------------------------------------------------------

inline SupervisedSet stage_build_features(const PipelineConfig& cfg, std::span<const RunRecord> runs,
                                          const HiSeries& hi, std::span<const PlanEntry> plan,
                                          OutputSet& out) {
  SupervisedSet set = build_supervised(runs, hi, plan, cfg.chamber.sensors, feature_options(cfg));
  out.write(files::features, [&](std::ostream& o) { write_features(o, set); });
  out.write(files::meta, [&](std::ostream& o) { write_feature_meta(o, set); });
  return set;
}

inline SupervisedSet load_supervised(const PipelineConfig& cfg) {
  return read_supervised(input_path(cfg, files::features), input_path(cfg, files::meta));
}

// --- train ----------------------------------------------------------------

inline std::vector<FittedModel> stage_train(const PipelineConfig& cfg, const SupervisedSet& set,
                                            OutputSet& out) {
  const auto [train, test] = chrono_split(set, cfg.train_frac);
  const std::uint64_t seed = cfg.require_seed();
  std::vector<FittedModel> models;
  for (ModelKind kind : selected_models(cfg)) {
    models.push_back(fit_model(kind, cfg.hp, train, seed, cfg.threads));
    const FittedModel& m = models.back();
    out.write(files::model(kind), [&](std::ostream& o) { write_model(o, m); });
  }
  return models;
}

inline std::vector<FittedModel> load_models(const PipelineConfig& cfg) {
  std::vector<FittedModel> models;
  for (ModelKind kind : selected_models(cfg)) {
    models.push_back(load_model(input_path(cfg, files::model(kind).c_str())));
    require(models.back().kind == kind, Errc::model, files::model(kind) + " holds a different model kind");
  }
  return models;
}

// --- evaluate -------------------------------------------------------------

inline EvalReport stage_evaluate(const PipelineConfig& cfg, const SupervisedSet& set,
                                 std::span<const FittedModel> models, OutputSet& out) {
  const auto [train, test] = chrono_split(set, cfg.train_frac);
  const Benchmarks benchmarks = Benchmarks::fit(train);
  EvalReport report = evaluate_all(models, benchmarks, test, cfg.threads);
  report.dataset = {set.size(), train.size(), test.size(), set.names.size(), set.horizon,
                    cfg.train_frac, cfg.require_seed(), config_hash(cfg)};
  PipelineConfig copy = cfg;
  for (const auto& f : config_fields(copy)) {
    if (f.section == "models") report.hyperparameters.emplace_back(f.key, f.get());
  }
  out.write(files::report, [&](std::ostream& o) { write_report(o, report); });
  out.write(files::plot, [&](std::ostream& o) { write_plot_data(o, report); });
  if (cfg.dump_predictions) {
    out.write(files::predictions, [&](std::ostream& o) { write_predictions(o, report); });
  }
  return report;
}

// --- pipeline -------------------------------------------------------------

// All five stages in order, handing results over in memory. The written
// artifacts are exactly what the standalone subcommands would produce.
inline EvalReport run_pipeline(const PipelineConfig& cfg, OutputSet& out) {
  const Dataset data = stage_simulate(cfg, out);
  const HiDerivation hi = stage_derive_hi(cfg, data.runs, out);
  const SupervisedSet set = stage_build_features(cfg, data.runs, hi.series, data.plan, out);
  const auto models = stage_train(cfg, set, out);
  return stage_evaluate(cfg, set, models, out);
}

}  // namespace pumphi
