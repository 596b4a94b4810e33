#include "polywsd/bench.hpp"

#include <chrono>
#include <ostream>

namespace polywsd {

RunMetrics run_training(const Corpus& corpus, const SenseInventory& inventory, const TrainConfig& config,
                        TrainMode mode, TrainState& state, const std::string& fingerprint,
                        std::uint64_t device_count, std::ostream* log) {
  Trainer trainer(corpus, inventory, config, mode, state);
  RunMetrics run;
  run.mode = mode_name(mode);
  run.fingerprint = fingerprint;
  run.device_count = device_count;
  const auto started = std::chrono::steady_clock::now();
  trainer.run([&](const StepMetrics& m) {
    ++run.steps;
    run.gloss_forwards += m.counts.gloss;
    run.context_forwards += m.counts.context;
    if (log) *log << step_record(m).dump() << "\n";
  });
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (log) *log << summary_record(run).dump() << "\n";
  return run;
}

TrainingRun train_fresh(const Corpus& corpus, const SenseInventory& inventory, const RunConfig& config,
                        TrainMode mode, const std::string& fingerprint, std::uint64_t device_count,
                        std::ostream* log) {
  TrainingRun r{initial_state(corpus, inventory, config.model, config.train), {}};
  r.metrics = run_training(corpus, inventory, config.train, mode, r.state, fingerprint, device_count, log);
  return r;
}

CostComparison bench_modes(const Corpus& corpus, const SenseInventory& inventory, const RunConfig& config,
                           const std::string& fingerprint, std::uint64_t device_count) {
  const TrainingRun bcl = train_fresh(corpus, inventory, config, TrainMode::Bcl, fingerprint, device_count);
  const TrainingRun all =
      train_fresh(corpus, inventory, config, TrainMode::AllCandidates, fingerprint, device_count);
  return compare_costs(bcl.metrics, all.metrics);
}

}  // namespace polywsd
