// pumphi: simulate -> derive-hi -> build-features -> train -> evaluate, or all of
// them at once with `pipeline`.
//
// Exit status: 0 ok, 2 ConfigError, 3 DataError, 4 ModelError, 1 anything else.
// Failures print exactly one line on stderr:
//   error <ConfigError|DataError|ModelError> <Code>: <message>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pumphi/config.hpp"
#include "pumphi/pipeline.hpp"

namespace {

using namespace pumphi;

struct FlagSpec {
  const char* flag;
  const char* section;
  const char* key;
  const char* help;
};

// Named shortcuts for config keys; `--set section.key=value` reaches the rest.
const std::vector<FlagSpec> kCommonFlags = {
    {"--seed", "cli", "seed", "random seed (required unless [cli] seed is set)"},
    {"--out", "cli", "out", "output directory"},
    {"--in", "cli", "in", "input directory (defaults to --out)"},
    {"--threads", "cli", "threads", "worker thread cap"},
};
const std::vector<FlagSpec> kSimulateFlags = {
    {"--n-assets", "simgen", "n_assets", "number of assets"},
    {"--n-runs", "simgen", "n_runs_total", "total runs over all assets"},
    {"--cycle-length", "simgen", "cycle_length", "runs per maintenance cycle"},
};
const std::vector<FlagSpec> kHiFlags = {
    {"--segments", "hi", "segments", "pressure segments, upper:lower,... in mbar"},
};
const std::vector<FlagSpec> kFeatureFlags = {
    {"--horizon", "features", "horizon", "forecast horizon in runs"},
    {"--train-frac", "features", "train_frac", "oldest fraction of rows used for training"},
};
const std::vector<FlagSpec> kModelFlags = {
    {"--model", "models", "model", "dt, rf, knn, svr, mlp or all"},
    {"--dt-max-depth", "models", "dt_max_depth", "decision tree depth limit (<0: none)"},
    {"--dt-min-leaf", "models", "dt_min_samples_leaf", "decision tree minimum leaf size"},
    {"--rf-trees", "models", "rf_n_trees", "random forest size"},
    {"--rf-max-depth", "models", "rf_max_depth", "random forest depth limit"},
    {"--rf-min-leaf", "models", "rf_min_samples_leaf", "random forest minimum leaf size"},
    {"--rf-mtry", "models", "rf_features_per_split", "features tried per split (0: ceil(m/3))"},
    {"--rf-bootstrap", "models", "rf_bootstrap", "bootstrap resampling (true/false)"},
    {"--knn-k", "models", "knn_k", "neighbours"},
    {"--svr-epsilon", "models", "svr_epsilon", "insensitive tube half-width, seconds"},
    {"--svr-lambda", "models", "svr_lambda", "L2 penalty"},
    {"--svr-steps", "models", "svr_steps", "subgradient steps"},
    {"--svr-step-size", "models", "svr_step_size", "initial step size"},
    {"--mlp-hidden", "models", "mlp_hidden_units", "hidden units"},
    {"--mlp-epochs", "models", "mlp_epochs", "training epochs"},
    {"--mlp-batch", "models", "mlp_batch_size", "mini-batch size"},
    {"--mlp-lr", "models", "mlp_learning_rate", "Adam learning rate"},
};

struct Invocation {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;  // "section.key" -> value
  bool dump_predictions = false;
};

void add_flags(CLI::App* cmd, Invocation& inv, const std::vector<FlagSpec>& specs) {
  for (const auto& s : specs) {
    const std::string target = std::string(s.section) + "." + s.key;
    cmd->add_option_function<std::string>(
        s.flag, [&inv, target](const std::string& v) { inv.flag_values[target] = v; }, s.help);
  }
}

PipelineConfig resolve(const Invocation& inv) {
  PipelineConfig cfg;
  std::vector<ConfigOverride> overrides;
  if (!inv.config_path.empty()) overrides = read_ini_file(inv.config_path);
  for (const auto& s : inv.sets) overrides.push_back(parse_override(s));
  for (const auto& [target, value] : inv.flag_values) {
    const auto dot = target.find('.');
    overrides.push_back({target.substr(0, dot), target.substr(dot + 1), value});
  }
  if (inv.dump_predictions) overrides.push_back({"eval", "dump_predictions", "true"});
  apply_overrides(cfg, overrides);
  return cfg;
}

void print_config(const std::string& command, const PipelineConfig& cfg) {
  std::cout << "; pumphi " << command << " effective configuration\n" << effective_config(cfg) << std::endl;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int report_error(std::string_view cls, std::string_view code, const std::string& what) {
  std::cerr << "error " << cls << ' ' << code << ": " << one_line(what) << std::endl;
  if (cls == "ConfigError") return 2;
  if (cls == "DataError") return 3;
  if (cls == "ModelError") return 4;
  return 1;
}

void print_fits(const HiDerivation& d) {
  std::cout << "segment fits on " << d.subset_runs.size() << " runs:\n";
  for (std::size_t i = 0; i < d.fits.size(); ++i) {
    const auto& f = d.fits[i];
    std::cout << "  " << f.segment.label() << "  k=" << format_double(f.k) << "  t_bar=" << format_double(f.t_bar)
              << "  alpha=" << format_double(f.alpha) << "%  r2=" << format_double(f.r2)
              << (f.viable ? "" : "  (" + f.status + ")") << (i == d.selected ? "  <- selected" : "") << '\n';
  }
}

void print_report(const EvalReport& r) {
  std::cout << "test MAE (s) on " << r.dataset.n_test << " rows:\n";
  for (const auto& s : r.results) {
    std::cout << "  " << s.model << "  " << (s.mae ? format_double(*s.mae) : s.status) << '\n';
  }
  std::cout << "  bm1  " << format_double(r.bm1) << "\n  bm2  " << format_double(r.bm2) << "\n  bm3  "
            << format_double(r.bm3) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Health index derivation and forecasting for vacuum coating chambers"};
  app.require_subcommand(1);
  Invocation inv;

  struct Command {
    const char* name;
    const char* help;
    std::vector<const std::vector<FlagSpec>*> flags;
    bool dump = false;
  };
  const std::vector<Command> commands = {
      {"simulate", "generate a synthetic dataset", {&kSimulateFlags}},
      {"derive-hi", "fit segment degradation and write the health index", {&kHiFlags}},
      {"build-features", "build the supervised forecasting table", {&kFeatureFlags}},
      {"train", "fit forecasting models", {&kFeatureFlags, &kModelFlags}},
      {"evaluate", "score models and benchmarks on the test split", {&kFeatureFlags, &kModelFlags}, true},
      {"pipeline", "run every stage in order",
       {&kSimulateFlags, &kHiFlags, &kFeatureFlags, &kModelFlags}, true},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", inv.config_path, "INI configuration file");
    sub->add_option("--set", inv.sets, "override any key: section.key=value (repeatable)");
    add_flags(sub, inv, kCommonFlags);
    for (const auto* f : c.flags) add_flags(sub, inv, *f);
    if (c.dump) sub->add_flag("--dump-predictions", inv.dump_predictions, "also write predictions.csv");
    subs[c.name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("ConfigError", "Config", e.what());
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  try {
    const PipelineConfig cfg = resolve(inv);
    print_config(command, cfg);
    OutputSet out(cfg.out_dir);

    if (command == "simulate") {
      const Dataset d = stage_simulate(cfg, out);
      std::cout << "simulated " << d.runs.size() << " runs on " << cfg.n_assets << " assets\n";
    } else if (command == "derive-hi") {
      print_fits(stage_derive_hi(cfg, load_runs(cfg), out));
    } else if (command == "build-features") {
      const auto runs = load_runs(cfg);
      const HiSeries hi = read_hi(input_path(cfg, files::hi));
      const auto plan = read_plan(input_path(cfg, files::plan));
      const SupervisedSet set = stage_build_features(cfg, runs, hi, plan, out);
      std::cout << "built " << set.size() << " rows x " << set.names.size() << " features\n";
    } else if (command == "train") {
      const auto models = stage_train(cfg, load_supervised(cfg), out);
      std::cout << "trained " << models.size() << " model(s)\n";
    } else if (command == "evaluate") {
      const SupervisedSet set = load_supervised(cfg);
      print_report(stage_evaluate(cfg, set, load_models(cfg), out));
    } else if (command == "pipeline") {
      const Dataset data = stage_simulate(cfg, out);
      const HiDerivation hi = stage_derive_hi(cfg, data.runs, out);
      print_fits(hi);
      const SupervisedSet set = stage_build_features(cfg, data.runs, hi.series, data.plan, out);
      const auto models = stage_train(cfg, set, out);
      print_report(stage_evaluate(cfg, set, models, out));
    }
    out.commit();
    std::cout << "wrote outputs to " << cfg.out_dir << std::endl;
  } catch (const Error& e) {
    return report_error(error_class_name(e.error_class()), errc_name(e.code()), e.message());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("DataError", "Filesystem", e.what());
  } catch (const std::exception& e) {
    return report_error("InternalError", "Unexpected", e.what());
  }
  return 0;
}
