#pragma once

// Pipeline configuration. Every setting is a (section, key) field; the same field
// table drives INI loading, command-line overrides, the printed effective
// configuration and the config hash in the report.
//
// Sections: [cli] [core] [simgen] [hi] [features] [models] [eval].

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pumphi/core.hpp"
#include "pumphi/error.hpp"
#include "pumphi/hi.hpp"
#include "pumphi/io.hpp"
#include "pumphi/models/regressor.hpp"
#include "pumphi/simgen.hpp"

namespace pumphi {

struct PipelineConfig {
  // [cli]
  std::string in_dir;  // empty: read from out_dir
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  // [core] sensors live in chamber.sensors; [simgen]
  ChamberConfig chamber;
  std::vector<RecipeSpec> recipes = default_recipes();
  int n_assets = 5;
  int n_runs_total = 2000;
  int cycle_length = 100;
  // [hi]
  std::vector<SegmentSpec> segments = default_segments();
  int hi_cycle_length = 100;
  int clean_window = 10;
  std::optional<int> analysis_asset;
  std::optional<std::string> analysis_recipe;
  std::size_t analysis_max_runs = 400;
  // [features]
  std::size_t horizon = 10;
  double train_frac = 0.7;
  // [models]
  std::string model = "all";
  ModelHyperparams hp;
  // [eval]
  bool dump_predictions = false;

  const std::string& input_dir() const { return in_dir.empty() ? out_dir : in_dir; }
  std::uint64_t require_seed() const {
    require(seed.has_value(), Errc::config, "--seed is required (or set seed in [cli])");
    return *seed;
  }
};

struct ConfigField {
  std::string section;
  std::string key;
  bool hashed = true;  // false for paths, thread count and output toggles
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

namespace detail {

template <class T>
T parse_config_number(std::string_view s, const std::string& where) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty(), Errc::config,
          where + ": cannot parse '" + std::string(s) + "'");
  return v;
}

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  for (;;) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

class FieldTable {
 public:
  std::vector<ConfigField> fields;

  template <class T>
  void number(const std::string& section, const std::string& key, T& ref, bool hashed = true) {
    const std::string where = section + "." + key;
    fields.push_back({section, key, hashed,
                      [&ref] {
                        if constexpr (std::is_floating_point_v<T>) return format_double(ref);
                        else return std::to_string(ref);
                      },
                      [&ref, where](std::string_view s) { ref = parse_config_number<T>(s, where); }});
  }

  void flag(const std::string& section, const std::string& key, bool& ref, bool hashed = true) {
    const std::string where = section + "." + key;
    fields.push_back({section, key, hashed, [&ref] { return std::string(ref ? "true" : "false"); },
                      [&ref, where](std::string_view s) {
                        if (s == "true" || s == "1" || s == "yes" || s == "on") ref = true;
                        else if (s == "false" || s == "0" || s == "no" || s == "off") ref = false;
                        else fail(Errc::config, where + ": expected true or false, got '" + std::string(s) + "'");
                      }});
  }

  void text(const std::string& section, const std::string& key, std::string& ref, bool hashed = true) {
    fields.push_back({section, key, hashed, [&ref] { return ref; },
                      [&ref](std::string_view s) { ref = std::string(s); }});
  }

  template <class T>
  void optional_number(const std::string& section, const std::string& key, std::optional<T>& ref,
                       bool hashed = true) {
    const std::string where = section + "." + key;
    fields.push_back({section, key, hashed, [&ref] { return ref ? std::to_string(*ref) : std::string(); },
                      [&ref, where](std::string_view s) {
                        if (s.empty()) ref.reset();
                        else ref = parse_config_number<T>(s, where);
                      }});
  }

  void optional_text(const std::string& section, const std::string& key, std::optional<std::string>& ref) {
    fields.push_back({section, key, true, [&ref] { return ref.value_or(""); },
                      [&ref](std::string_view s) {
                        if (s.empty()) ref.reset();
                        else ref = std::string(s);
                      }});
  }
};

inline std::string format_segments(const std::vector<SegmentSpec>& segments) {
  std::string out;
  for (const auto& s : segments) {
    if (!out.empty()) out += ", ";
    out += format_double(s.upper) + ":" + format_double(s.lower);
  }
  return out;
}

inline std::vector<SegmentSpec> parse_segments(std::string_view s) {
  std::vector<SegmentSpec> out;
  for (const auto& item : split_list(s)) {
    const auto colon = item.find(':');
    require(colon != std::string::npos, Errc::config, "hi.segments: expected upper:lower, got '" + item + "'");
    SegmentSpec seg;
    seg.index = static_cast<int>(out.size()) + 1;
    seg.upper = parse_config_number<double>(trim(std::string_view(item).substr(0, colon)), "hi.segments");
    seg.lower = parse_config_number<double>(trim(std::string_view(item).substr(colon + 1)), "hi.segments");
    out.push_back(seg);
  }
  return out;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace detail

// Field table bound to `cfg`; the recipe keys follow cfg.recipes as it is now.
inline std::vector<ConfigField> config_fields(PipelineConfig& cfg) {
  detail::FieldTable t;
  t.text("cli", "in", cfg.in_dir, false);
  t.text("cli", "out", cfg.out_dir, false);
  t.optional_number("cli", "seed", cfg.seed);
  t.number("cli", "threads", cfg.threads, false);

  for (std::size_t i = 0; i < kSensorCount; ++i) {
    auto& s = cfg.chamber.sensors[i];
    const std::string p = "sensor" + std::to_string(i + 1) + "_";
    t.text("core", p + "id", s.id);
    t.number("core", p + "min_mbar", s.min_mbar);
    t.number("core", p + "max_mbar", s.max_mbar);
    t.number("core", p + "priority", s.priority);
    t.number("core", p + "noise_gain", s.noise_gain);
  }

  auto& c = cfg.chamber;
  t.number("simgen", "n_assets", cfg.n_assets);
  t.number("simgen", "n_runs_total", cfg.n_runs_total);
  t.number("simgen", "cycle_length", cfg.cycle_length);
  t.number("simgen", "atmospheric_mbar", c.atmospheric_mbar);
  t.number("simgen", "tau_stage1_s", c.tau_stage1_s);
  t.number("simgen", "tau_stage2_s", c.tau_stage2_s);
  t.number("simgen", "crossover_mbar", c.crossover_mbar);
  t.number("simgen", "base_outgassing_mbar", c.base_outgassing_mbar);
  t.number("simgen", "outgassing_per_unit", c.outgassing_per_unit);
  t.number("simgen", "slowdown_per_unit", c.slowdown_per_unit);
  t.number("simgen", "residual_contamination", c.residual_contamination);
  t.number("simgen", "seasonal_amplitude", c.seasonal_amplitude);
  t.number("simgen", "seasonal_phase0", c.seasonal_phase0);
  t.number("simgen", "year_s", c.year_s);
  t.number("simgen", "epoch0", c.epoch0);
  t.number("simgen", "run_interval_s", c.run_interval_s);
  t.number("simgen", "asset_stagger_s", c.asset_stagger_s);
  t.number("simgen", "sample_dt_s", c.sample_dt_s);
  t.number("simgen", "noise_sigma", c.noise_sigma);
  t.number("simgen", "pump_drift_sigma", c.pump_drift_sigma);
  t.number("simgen", "pump_drift_phi", c.pump_drift_phi);
  t.number("simgen", "pump_jitter_sigma", c.pump_jitter_sigma);
  t.number("simgen", "outgassing_jitter_sigma", c.outgassing_jitter_sigma);
  t.number("simgen", "end_pressure_mbar", c.end_pressure_mbar);
  t.number("simgen", "max_pumpdown_s", c.max_pumpdown_s);
  t.number("simgen", "process_time_s", c.process_time_s);
  t.number("simgen", "process_pressure_mbar", c.process_pressure_mbar);
  t.number("simgen", "temperature_mean_c", c.temperature_mean_c);
  t.number("simgen", "temperature_amplitude_c", c.temperature_amplitude_c);
  t.number("simgen", "temperature_weather_c", c.temperature_weather_c);
  t.number("simgen", "temperature_noise_c", c.temperature_noise_c);
  t.number("simgen", "gas_flow_noise_sccm", c.gas_flow_noise_sccm);
  t.fields.push_back({"simgen", "recipes", true,
                      [&cfg] {
                        std::vector<std::string> ids;
                        for (const auto& r : cfg.recipes) ids.push_back(r.recipe_id);
                        return detail::join(ids);
                      },
                      [](std::string_view) { /* applied before the table is built */ }});
  for (auto& r : cfg.recipes) {
    const std::string p = "recipe_" + r.recipe_id + "_";
    t.number("simgen", p + "deposition_weight", r.deposition_weight);
    t.number("simgen", p + "duration_scale", r.duration_scale);
    t.number("simgen", p + "probability", r.probability);
    t.number("simgen", p + "gas_flow_sccm", r.gas_flow_sccm);
  }

  t.fields.push_back({"hi", "segments", true, [&cfg] { return detail::format_segments(cfg.segments); },
                      [&cfg](std::string_view s) { cfg.segments = detail::parse_segments(s); }});
  t.number("hi", "cycle_length", cfg.hi_cycle_length);
  t.number("hi", "clean_window", cfg.clean_window);
  t.optional_number("hi", "analysis_asset", cfg.analysis_asset);
  t.optional_text("hi", "analysis_recipe", cfg.analysis_recipe);
  t.number("hi", "analysis_max_runs", cfg.analysis_max_runs);

  t.number("features", "horizon", cfg.horizon);
  t.number("features", "train_frac", cfg.train_frac);

  auto& hp = cfg.hp;
  t.text("models", "model", cfg.model);
  t.number("models", "dt_max_depth", hp.dt.max_depth);
  t.number("models", "dt_min_samples_leaf", hp.dt.min_samples_leaf);
  t.number("models", "rf_n_trees", hp.rf.n_trees);
  t.number("models", "rf_max_depth", hp.rf.max_depth);
  t.number("models", "rf_min_samples_leaf", hp.rf.min_samples_leaf);
  t.number("models", "rf_features_per_split", hp.rf.features_per_split);
  t.flag("models", "rf_bootstrap", hp.rf.bootstrap);
  t.number("models", "knn_k", hp.knn_k);
  t.number("models", "svr_epsilon", hp.svr.epsilon);
  t.number("models", "svr_lambda", hp.svr.reg_lambda);
  t.number("models", "svr_steps", hp.svr.steps);
  t.number("models", "svr_step_size", hp.svr.step_size);
  t.number("models", "mlp_hidden_units", hp.mlp.hidden_units);
  t.number("models", "mlp_epochs", hp.mlp.epochs);
  t.number("models", "mlp_batch_size", hp.mlp.batch_size);
  t.number("models", "mlp_learning_rate", hp.mlp.learning_rate);

  t.flag("eval", "dump_predictions", cfg.dump_predictions, false);
  return std::move(t.fields);
}

struct ConfigOverride {
  std::string section;
  std::string key;
  std::string value;
};

// "section.key=value"
inline ConfigOverride parse_override(std::string_view s) {
  const auto eq = s.find('=');
  const auto dot = s.find('.');
  require(eq != std::string_view::npos && dot != std::string_view::npos && dot < eq, Errc::config,
          "override must look like section.key=value, got '" + std::string(s) + "'");
  return {detail::trim(s.substr(0, dot)), detail::trim(s.substr(dot + 1, eq - dot - 1)),
          detail::trim(s.substr(eq + 1))};
}

inline std::vector<ConfigOverride> read_ini_overrides(std::istream& in, const std::string& name) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(Errc::config, name + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::vector<ConfigOverride> out;
  for (const auto& [section, body] : tree) {
    require(body.data().empty(), Errc::config, name + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) out.push_back({section, key, value.data()});
  }
  return out;
}

inline std::vector<ConfigOverride> read_ini_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), Errc::config, "cannot open config file " + path);
  return read_ini_overrides(in, path);
}

inline void validate(const PipelineConfig& cfg) {
  validate(cfg.chamber);
  require(!cfg.recipes.empty(), Errc::config, "simgen.recipes must list at least one recipe");
  for (const auto& r : cfg.recipes) validate(r);
  require(cfg.n_assets >= 1 && cfg.n_runs_total >= cfg.n_assets && cfg.cycle_length >= 2, Errc::config,
          "simgen needs n_assets >= 1, n_runs_total >= n_assets, cycle_length >= 2");
  require(!cfg.segments.empty(), Errc::config, "hi.segments must not be empty");
  for (const auto& s : cfg.segments) validate(s);
  require(cfg.hi_cycle_length >= 1 && cfg.clean_window >= 1 && cfg.analysis_max_runs >= 1, Errc::config,
          "hi.cycle_length, hi.clean_window and hi.analysis_max_runs must be >= 1");
  require(cfg.horizon >= 1, Errc::config, "features.horizon must be >= 1");
  require(cfg.train_frac > 0.0 && cfg.train_frac < 1.0, Errc::config, "features.train_frac must be in (0, 1)");
  require(cfg.threads >= 1, Errc::config, "cli.threads must be >= 1");
  if (cfg.model != "all") parse_model_kind(cfg.model);
  require(cfg.hp.rf.n_trees >= 1 && cfg.hp.knn_k >= 1, Errc::config, "rf_n_trees and knn_k must be >= 1");
}

// Applies overrides in order (later wins) and validates the result.
inline void apply_overrides(PipelineConfig& cfg, std::span<const ConfigOverride> overrides) {
  // The recipe list decides which recipe_<id>_* keys exist, so it goes first.
  for (const auto& o : overrides) {
    if (o.section != "simgen" || o.key != "recipes") continue;
    std::vector<RecipeSpec> next;
    for (const auto& id : detail::split_list(o.value)) {
      require(!id.empty(), Errc::config, "simgen.recipes contains an empty id");
      RecipeSpec spec{id};
      for (const auto& r : cfg.recipes) {
        if (r.recipe_id == id) spec = r;
      }
      next.push_back(spec);
    }
    cfg.recipes = std::move(next);
  }
  auto fields = config_fields(cfg);
  for (const auto& o : overrides) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const ConfigField& f) {
      return f.section == o.section && f.key == o.key;
    });
    require(it != fields.end(), Errc::config, "unknown config key [" + o.section + "] " + o.key);
    it->set(o.value);
  }
  validate(cfg);
}

inline std::string effective_config(const PipelineConfig& cfg, bool hashed_only = false) {
  PipelineConfig copy = cfg;
  std::ostringstream out;
  std::string section;
  for (const auto& f : config_fields(copy)) {
    if (hashed_only && !f.hashed) continue;
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << f.get() << '\n';
  }
  return out.str();
}

// 64-bit FNV-1a over the result-relevant settings, as 16 hex digits.
inline std::string config_hash(const PipelineConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : effective_config(cfg, true)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline HiOptions hi_options(const PipelineConfig& cfg) {
  HiOptions o;
  o.segments = cfg.segments;
  o.cycle_length = cfg.hi_cycle_length;
  o.clean_window = cfg.clean_window;
  o.subset.asset_id = cfg.analysis_asset;
  o.subset.recipe_id = cfg.analysis_recipe;
  o.subset.max_runs = cfg.analysis_max_runs;
  o.threads = cfg.threads;
  return o;
}

inline FeatureOptions feature_options(const PipelineConfig& cfg) {
  return {cfg.horizon, cfg.train_frac, cfg.threads};
}

inline HistoryOptions history_options(const PipelineConfig& cfg) {
  HistoryOptions o;
  o.n_assets = cfg.n_assets;
  o.n_runs_total = cfg.n_runs_total;
  o.cycle_length = cfg.cycle_length;
  o.seed = cfg.require_seed();
  o.threads = cfg.threads;
  return o;
}

inline std::vector<ModelKind> selected_models(const PipelineConfig& cfg) {
  if (cfg.model == "all") return {std::begin(kAllModels), std::end(kAllModels)};
  return {parse_model_kind(cfg.model)};
}

}  // namespace pumphi
