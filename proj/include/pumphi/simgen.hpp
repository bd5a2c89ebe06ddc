#pragma once

// Synthetic pumpdown generator and its closed-form oracle.
//
// Physics: stage 1 (backing pump) decays exponentially from atmosphere with time
// constant tau1 until the crossover pressure; stage 2 (turbopump) decays toward an
// outgassing floor p_ss with time constant tau2:
//
//   p(t) = p_atm * exp(-t / tau1)                            t <  t_x
//   p(t) = p_ss + (p_x - p_ss) * exp(-(t - t_x) / tau2)      t >= t_x
//
// Wall load L = c + seasonal(phase) slows stage 2 and raises the floor:
//   tau2 = tau2_clean * (1 + slowdown * L) * pump_factor,   p_ss = Q0 * outgas_factor + q * L
// pump_factor carries a slowly varying per-asset component (AR(1) in log space)
// plus per-run jitter; outgas_factor is per-run log-normal jitter.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "pumphi/core.hpp"
#include "pumphi/error.hpp"
#include "pumphi/parallel.hpp"
#include "pumphi/random.hpp"

namespace pumphi {

struct ChamberConfig {
  double atmospheric_mbar = 1013.0;
  double tau_stage1_s = 12.8;
  double tau_stage2_s = 6.0;
  double crossover_mbar = 0.02;
  double base_outgassing_mbar = 3e-5;         // Q0, floor of a clean chamber
  double outgassing_per_unit = 1e-7;          // q, floor increase per load unit
  double slowdown_per_unit = 0.0075;          // relative tau2 increase per load unit
  double residual_contamination = 0.0;        // contamination left after maintenance
  double seasonal_amplitude = 60.0;           // peak seasonal load, contamination units
  double seasonal_phase0 = 0.0;               // phase of the first run, fraction of a year
  double year_s = 365.25 * 86400.0;
  double epoch0 = 1.6e9;                      // start_time of the first run
  double run_interval_s = 78840.0;            // spacing of runs on one asset (~400 per year)
  double asset_stagger_s = 1577400.0;         // start offset between assets (~20 runs)
  double sample_dt_s = 0.5;
  double noise_sigma = 0.01;                  // log-normal sensor noise, scaled per gauge
  double pump_drift_sigma = 0.02;             // stationary sd of the slow log-tau2 component
  double pump_drift_phi = 0.90;               // per-run autocorrelation of that component
  double pump_jitter_sigma = 0.055;           // iid per-run log-tau2 jitter
  double outgassing_jitter_sigma = 0.30;      // iid per-run log-Q0 jitter
  double end_pressure_mbar = 8e-5;            // pumpdown stops here
  double max_pumpdown_s = 1800.0;
  double process_time_s = 30.0;               // coating phase after pumpdown, times recipe scale
  double process_pressure_mbar = 3e-3;
  double temperature_mean_c = 22.0;
  double temperature_amplitude_c = 6.0;
  double temperature_weather_c = 2.0;         // per-run ambient offset, sd
  double temperature_noise_c = 0.2;
  double gas_flow_noise_sccm = 0.5;
  SensorSet sensors = default_sensors();

  // Same chamber with every stochastic term switched off.
  ChamberConfig noiseless() const {
    ChamberConfig c = *this;
    c.noise_sigma = 0.0;
    c.pump_drift_sigma = 0.0;
    c.pump_jitter_sigma = 0.0;
    c.outgassing_jitter_sigma = 0.0;
    c.temperature_weather_c = 0.0;
    c.temperature_noise_c = 0.0;
    c.gas_flow_noise_sccm = 0.0;
    return c;
  }
};

inline void validate(const ChamberConfig& c) {
  auto check = [](bool ok, const char* what) { require(ok, Errc::config, what); };
  check(c.tau_stage1_s > 0.0 && c.tau_stage2_s > 0.0, "tau per stage must be > 0");
  check(c.atmospheric_mbar > 0.0, "atmospheric pressure must be > 0");
  check(c.crossover_mbar > c.base_outgassing_mbar && c.crossover_mbar < c.atmospheric_mbar,
        "crossover pressure must lie between the stage-2 floor and atmosphere");
  check(c.base_outgassing_mbar >= 0.0 && c.outgassing_per_unit >= 0.0,
        "outgassing terms must be >= 0");
  check(c.slowdown_per_unit >= 0.0, "slowdown_per_unit must be >= 0");
  check(c.residual_contamination >= 0.0, "residual contamination must be >= 0");
  check(c.seasonal_amplitude >= 0.0, "seasonal amplitude must be >= 0");
  check(c.year_s > 0.0 && c.run_interval_s > 0.0 && c.asset_stagger_s >= 0.0,
        "time spacing must be positive");
  check(c.sample_dt_s > 0.0, "sample_dt must be > 0");
  check(c.noise_sigma >= 0.0 && c.pump_drift_sigma >= 0.0 && c.pump_jitter_sigma >= 0.0 &&
            c.outgassing_jitter_sigma >= 0.0 && c.temperature_noise_c >= 0.0 &&
            c.temperature_weather_c >= 0.0 &&
            c.gas_flow_noise_sccm >= 0.0,
        "noise terms must be >= 0");
  check(c.pump_drift_phi >= 0.0 && c.pump_drift_phi < 1.0, "pump_drift_phi must be in [0, 1)");
  check(c.end_pressure_mbar > 0.0 && c.end_pressure_mbar < c.crossover_mbar,
        "end pressure must be below crossover");
  check(c.max_pumpdown_s > 0.0 && c.process_time_s >= 0.0, "durations must be >= 0");
  check(c.process_pressure_mbar > 0.0, "process pressure must be > 0");
  validate(c.sensors);
}

struct RecipeSpec {
  std::string recipe_id;
  double deposition_weight = 1.0;  // contamination units added per run
  double duration_scale = 1.0;     // multiplier on the process phase
  double probability = 1.0;        // share in the production schedule
  double gas_flow_sccm = 40.0;
};

inline void validate(const RecipeSpec& r) {
  require(!r.recipe_id.empty(), Errc::config, "recipe id must be non-empty");
  require(r.deposition_weight >= 0.0, Errc::config, "deposition_weight must be >= 0");
  require(r.duration_scale > 0.0, Errc::config, "duration_scale must be > 0");
  require(r.probability >= 0.0, Errc::config, "recipe probability must be >= 0");
}

inline std::vector<RecipeSpec> default_recipes() {
  return {
      {"A", 1.0, 1.0, 0.45, 40.0},
      {"B", 0.5, 0.8, 0.35, 25.0},
      {"C", 1.8, 1.4, 0.20, 60.0},
  };
}

struct ChamberState {
  double contamination = 0.0;
  int n_runs = 0;
  double seasonal_phase = 0.0;  // fraction of the year in [0, 1)
  double pump_drift = 0.0;      // unit-variance AR(1) state of the slow pump component
};

// Contamination-equivalent seasonal load; low in early spring, peaks in late autumn.
inline double seasonal_load(const ChamberConfig& c, double phase) {
  return c.seasonal_amplitude * 0.5 * (1.0 - std::sin(2.0 * std::numbers::pi * phase));
}

// Parameters of one run's noiseless pressure trajectory.
struct RunPhysics {
  double atmospheric = 1013.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  double crossover = 0.02;
  double p_ss = 0.0;

  double crossover_time() const { return tau1 * std::log(atmospheric / crossover); }
};

inline RunPhysics run_physics(const ChamberConfig& c, double load, double pump_factor = 1.0,
                              double outgassing_factor = 1.0) {
  RunPhysics phys;
  phys.atmospheric = c.atmospheric_mbar;
  phys.tau1 = c.tau_stage1_s;
  phys.tau2 = c.tau_stage2_s * (1.0 + c.slowdown_per_unit * load) * pump_factor;
  phys.crossover = c.crossover_mbar;
  phys.p_ss = c.base_outgassing_mbar * outgassing_factor + c.outgassing_per_unit * load;
  return phys;
}

inline double true_pressure(const RunPhysics& phys, double t) {
  const double tx = phys.crossover_time();
  if (t < tx) return phys.atmospheric * std::exp(-t / phys.tau1);
  return phys.p_ss + (phys.crossover - phys.p_ss) * std::exp(-(t - tx) / phys.tau2);
}

// Time to pump from p_a down to p_b under p(t) = p_ss + (p_a - p_ss) exp(-t / tau).
inline double closed_form_segment_duration(double p_a, double p_b, double tau, double p_ss) {
  require(tau > 0.0, Errc::config, "tau must be > 0");
  require(p_ss >= 0.0, Errc::config, "p_ss must be >= 0");
  require(p_a > p_b, Errc::config, "segment needs p_a > p_b");
  if (p_b <= p_ss) {
    fail(Errc::infeasible_segment, "target pressure " + std::to_string(p_b) +
                                       " is at or below the floor " + std::to_string(p_ss));
  }
  return tau * std::log((p_a - p_ss) / (p_b - p_ss));
}

// First time the noiseless trajectory reaches pressure x.
inline double closed_form_crossing_time(const RunPhysics& phys, double x) {
  if (x >= phys.atmospheric) return 0.0;
  if (x >= phys.crossover) return phys.tau1 * std::log(phys.atmospheric / x);
  if (x <= phys.p_ss) {
    fail(Errc::infeasible_segment, "pressure " + std::to_string(x) + " is below the floor");
  }
  return phys.crossover_time() +
         (x == phys.crossover ? 0.0
                              : closed_form_segment_duration(phys.crossover, x, phys.tau2, phys.p_ss));
}

// Segment duration on the noiseless trajectory; handles segments that straddle the
// pump crossover by summing the per-stage pieces.
inline double closed_form_run_segment_duration(const RunPhysics& phys, const SegmentSpec& seg) {
  return closed_form_crossing_time(phys, seg.lower) - closed_form_crossing_time(phys, seg.upper);
}

inline ChamberState advance_contamination(const ChamberState& state, const RecipeSpec& recipe,
                                          bool maintenance_due, double residual = 0.0) {
  ChamberState next = state;
  if (maintenance_due) {
    next.contamination = residual;
    next.n_runs = 0;
  } else {
    next.contamination = state.contamination + recipe.deposition_weight;
    next.n_runs = state.n_runs + 1;
  }
  return next;
}

struct RunIdentity {
  std::int64_t run_id = 0;
  int asset_id = 0;
  double start_time = 0.0;
};

inline constexpr const char* kTemperatureChannel = "temperature_c";
inline constexpr const char* kGasFlowChannel = "gas_flow_sccm";

inline RunRecord simulate_run(const ChamberState& state, const RecipeSpec& recipe,
                              const ChamberConfig& config, std::uint64_t seed,
                              const RunIdentity& id = {}) {
  validate(config);
  validate(recipe);
  require(state.contamination >= 0.0 && state.n_runs >= 0, Errc::config, "invalid chamber state");

  Rng rng(seed);
  const double load = state.contamination + seasonal_load(config, state.seasonal_phase);
  const double pump_factor = std::exp(config.pump_drift_sigma * state.pump_drift +
                                      config.pump_jitter_sigma * rng.normal());
  const double outgassing_factor = std::exp(config.outgassing_jitter_sigma * rng.normal());
  const RunPhysics phys = run_physics(config, load, pump_factor, outgassing_factor);
  const double temperature = config.temperature_mean_c +
                             config.temperature_amplitude_c *
                                 std::sin(2.0 * std::numbers::pi * state.seasonal_phase) +
                             config.temperature_weather_c * rng.normal();

  RunRecord run;
  run.run_id = id.run_id;
  run.asset_id = id.asset_id;
  run.start_time = id.start_time;
  run.recipe_id = recipe.recipe_id;
  run.n_runs = state.n_runs;
  run.extra_channels = {{kTemperatureChannel, {}}, {kGasFlowChannel, {}}};

  RunTruth truth;
  truth.contamination = state.contamination;
  truth.load = load;
  truth.p_ss = phys.p_ss;
  truth.tau_stage1 = phys.tau1;
  truth.tau_stage2 = phys.tau2;
  truth.crossover = phys.crossover;
  truth.atmospheric = phys.atmospheric;

  auto emit = [&](double t, double p, double gas_flow) {
    PressureSample sample;
    sample.t = t;
    for (std::size_t s = 0; s < kSensorCount; ++s) {
      const double sigma = config.noise_sigma * config.sensors[s].noise_gain;
      const double reading = p * std::exp(sigma * rng.normal());
      if (config.sensors[s].contains(reading)) sample.readings[s] = reading;
    }
    run.samples.push_back(sample);
    truth.pressure.push_back(p);
    run.extra_channels[0].values.push_back(temperature + config.temperature_noise_c * rng.normal());
    run.extra_channels[1].values.push_back(
        std::max(0.0, gas_flow + config.gas_flow_noise_sccm * rng.normal()));
  };

  std::int64_t k = 0;
  for (;; ++k) {
    const double t = static_cast<double>(k) * config.sample_dt_s;
    const double p = true_pressure(phys, t);
    emit(t, p, 0.0);
    if (p <= config.end_pressure_mbar || t >= config.max_pumpdown_s) break;
  }
  const double process_s = config.process_time_s * recipe.duration_scale;
  const std::int64_t process_samples =
      static_cast<std::int64_t>(std::floor(process_s / config.sample_dt_s));
  for (std::int64_t j = 1; j <= process_samples; ++j) {
    emit(static_cast<double>(k + j) * config.sample_dt_s, config.process_pressure_mbar,
         recipe.gas_flow_sccm);
  }

  run.truth = std::move(truth);
  return run;
}

struct PlanEntry {
  int asset_id = 0;
  int position = 0;  // index of the run within its asset's history
  std::string recipe_id;

  bool operator==(const PlanEntry&) const = default;
};

struct Dataset {
  std::vector<RunRecord> runs;  // ordered by (asset_id, start_time)
  std::vector<PlanEntry> plan;
};

struct HistoryOptions {
  int n_assets = 5;
  int n_runs_total = 2000;
  int cycle_length = 100;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

inline Dataset simulate_history(const ChamberConfig& config, const std::vector<RecipeSpec>& recipes,
                                const HistoryOptions& opt) {
  validate(config);
  require(opt.n_assets >= 1, Errc::config, "n_assets must be >= 1");
  require(opt.cycle_length >= 2, Errc::config, "cycle_length must be >= 2");
  require(opt.n_runs_total >= opt.n_assets, Errc::config, "need at least one run per asset");
  require(!recipes.empty(), Errc::config, "at least one recipe is required");
  std::vector<double> shares;
  double total_share = 0.0;
  for (const auto& r : recipes) {
    validate(r);
    shares.push_back(r.probability);
    total_share += r.probability;
  }
  require(total_share > 0.0, Errc::config, "recipe probabilities must not all be zero");

  const int base = opt.n_runs_total / opt.n_assets;
  const int extra = opt.n_runs_total % opt.n_assets;
  std::vector<int> counts(opt.n_assets);
  std::vector<std::int64_t> first_id(opt.n_assets);
  std::int64_t next_id = 1;
  for (int a = 0; a < opt.n_assets; ++a) {
    counts[a] = base + (a < extra ? 1 : 0);
    first_id[a] = next_id;
    next_id += counts[a];
  }

  std::vector<std::vector<RunRecord>> per_asset(opt.n_assets);
  std::vector<std::vector<PlanEntry>> plans(opt.n_assets);
  parallel_for(static_cast<std::size_t>(opt.n_assets), opt.threads, [&](std::size_t ai) {
    const int asset = static_cast<int>(ai);
    Rng rng = Rng::substream(opt.seed, ai);
    const int n = counts[asset];
    std::vector<std::size_t> schedule(n);
    for (int i = 0; i < n; ++i) schedule[i] = rng.categorical(shares);

    ChamberState state;
    state.contamination = config.residual_contamination;
    state.pump_drift = rng.normal();
    const double innovation = std::sqrt(1.0 - config.pump_drift_phi * config.pump_drift_phi);
    auto& runs = per_asset[ai];
    runs.reserve(n);
    for (int pos = 0; pos < n; ++pos) {
      const RecipeSpec& recipe = recipes[schedule[pos]];
      RunIdentity id;
      id.run_id = first_id[asset] + pos;
      id.asset_id = asset;
      id.start_time = config.epoch0 + pos * config.run_interval_s + asset * config.asset_stagger_s;
      const double years = (id.start_time - config.epoch0) / config.year_s;
      state.seasonal_phase = years + config.seasonal_phase0 - std::floor(years + config.seasonal_phase0);
      runs.push_back(simulate_run(state, recipe, config, rng.next(), id));
      plans[ai].push_back({asset, pos, recipe.recipe_id});

      const bool due = state.n_runs + 1 >= opt.cycle_length;
      const double drift = state.pump_drift;
      state = advance_contamination(state, recipe, due, config.residual_contamination);
      state.pump_drift = config.pump_drift_phi * drift + innovation * rng.normal();
    }
  });

  Dataset out;
  for (int a = 0; a < opt.n_assets; ++a) {
    for (auto& r : per_asset[a]) out.runs.push_back(std::move(r));
    for (auto& p : plans[a]) out.plan.push_back(std::move(p));
  }
  return out;
}

}  // namespace pumphi
