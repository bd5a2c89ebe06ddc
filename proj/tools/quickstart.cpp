// Library walk-through: simulate a small fleet, derive the health index, and
// compare a random forest against the persistence benchmark.

#include <iostream>

#include "pumphi/eval.hpp"
#include "pumphi/features.hpp"
#include "pumphi/hi.hpp"
#include "pumphi/models/benchmarks.hpp"
#include "pumphi/models/regressor.hpp"
#include "pumphi/simgen.hpp"

int main() {
  using namespace pumphi;
  const ChamberConfig chamber;
  HistoryOptions history;
  history.n_assets = 2;
  history.n_runs_total = 600;
  history.seed = 1;
  const Dataset data = simulate_history(chamber, default_recipes(), history);

  const HiDerivation hi = derive_hi(data.runs, chamber.sensors);
  for (const auto& f : hi.fits) {
    std::cout << f.segment.label() << " r2=" << f.r2 << " alpha=" << f.alpha << "%\n";
  }
  std::cout << "health index = duration of " << hi.series.selected_segment.label() << "\n";

  const SupervisedSet set = build_supervised(data.runs, hi.series, data.plan, chamber.sensors);
  const auto [train, test] = chrono_split(set);
  const FittedModel rf = fit_model(ModelKind::rf, ModelHyperparams{}, train, history.seed);
  const Benchmarks bm = Benchmarks::fit(train);
  std::cout << "rf MAE  " << mae(test.y, rf.predict(test.X)) << " s\n"
            << "bm1 MAE " << mae(test.y, bm.predict(BenchmarkKind::bm1, test)) << " s\n";
}
