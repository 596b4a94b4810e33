#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "polywsd/bcl.hpp"
#include "polywsd/config.hpp"
#include "polywsd/eval.hpp"

namespace polywsd {

struct TrainingRun {
  TrainState state;
  RunMetrics metrics;
};

// Trains `state` to completion and times it. Step records and the summary
// go to `log` when given. `fingerprint` is copied into the metrics.
RunMetrics run_training(const Corpus& corpus, const SenseInventory& inventory, const TrainConfig& config,
                        TrainMode mode, TrainState& state, const std::string& fingerprint,
                        std::uint64_t device_count = 1, std::ostream* log = nullptr);

// Fresh model from `config`, trained to completion.
TrainingRun train_fresh(const Corpus& corpus, const SenseInventory& inventory, const RunConfig& config,
                        TrainMode mode, const std::string& fingerprint, std::uint64_t device_count = 1,
                        std::ostream* log = nullptr);

// Trains the same fresh model once with BCL and once with all candidates and
// compares their costs; the BCL run is the candidate.
CostComparison bench_modes(const Corpus& corpus, const SenseInventory& inventory, const RunConfig& config,
                           const std::string& fingerprint, std::uint64_t device_count = 1);

}  // namespace polywsd
