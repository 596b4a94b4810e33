#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "polywsd/adam.hpp"
#include "polywsd/data.hpp"
#include "polywsd/fusion.hpp"
#include "polywsd/model.hpp"

namespace polywsd {

struct ForwardCounts {
  std::uint64_t context = 0;
  std::uint64_t gloss = 0;

  ForwardCounts& operator+=(const ForwardCounts& o) {
    context += o.context;
    gloss += o.gloss;
    return *this;
  }
  friend bool operator==(const ForwardCounts&, const ForwardCounts&) = default;
};

// Batch fusion matrix with its row softmax and diagonal. mask[i * b + j]
// marks an off-diagonal gloss identical to gloss i; it is excluded from row
// i's softmax (p is 0 there).
struct ScoreMatrix {
  Tensor m_f;
  Tensor p;
  Tensor p_d;
  std::vector<bool> mask;
};

struct LossValue {
  double total = 0.0;
  std::vector<double> per_example;
};

// m_f[i, j] = score_pair(words[i], glosses[j]) for every pair, computed as
// one product of the flattened codes. BatchError when either side is empty.
Var fusion_matrix(Tape& tape, std::span<const FusedRepresentation> words,
                  std::span<const FusedRepresentation> glosses);

// Marks (i, j), i != j, where glosses i and j are textually identical.
std::vector<bool> duplicate_gloss_mask(std::span<const std::vector<std::string>> glosses);

struct BclLoss {
  Var per_example;  // -log P^d_i, rank 1 [b]
  Var loss;         // mean of per_example
};

// Masked row softmax over m_f, diagonal extraction and mean negative log.
// A masked diagonal is an internal ContractError.
BclLoss bcl_loss(Tape& tape, Var m_f, const std::vector<bool>& mask);

ScoreMatrix make_score_matrix(Tensor m_f, std::vector<bool> mask = {});
LossValue bcl_loss(const ScoreMatrix& scores);

// Instances plus the gloss of each instance's gold sense, aligned by index.
struct Batch {
  std::vector<const CorpusInstance*> instances;
  std::vector<std::vector<std::string>> gold_glosses;

  std::size_t size() const { return instances.size(); }
};

// DataError naming the instance when a gold label is absent or not in the
// inventory.
Batch make_batch(std::span<const CorpusInstance* const> instances, const SenseInventory& inventory);

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 42;
  double grad_clip = 0.0;  // 0 disables clipping
  std::size_t min_freq = 1;

  // ConfigError for batch_size < 2 or non-positive rates.
  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct BclForward {
  Var m_f;
  BclLoss loss;
  ForwardCounts counts;
};

// b context encodes and b gloss encodes on one tape.
BclForward bcl_forward(Tape& tape, const Batch& batch, const Model& model, const Vocab& vocab);

struct CandidateForward {
  Var loss;
  Var per_example;
  ForwardCounts counts;
};

// Every candidate gloss of every instance is encoded and scored; loss is the
// mean cross-entropy against the gold index.
CandidateForward all_candidates_forward(Tape& tape, const Batch& batch, const SenseInventory& inventory,
                                        const Model& model, const Vocab& vocab);

struct StepResult {
  LossValue loss;
  ForwardCounts counts;
};

// Forward, backward and one Adam update. BatchError for b < 2; TrainingError
// when the loss is not finite (the model is left untouched).
StepResult train_step(const Batch& batch, Model& model, const Vocab& vocab, AdamState& adam,
                      const TrainConfig& config, std::size_t batch_index = 0);
StepResult train_all_candidates_step(const Batch& batch, const SenseInventory& inventory, Model& model,
                                     const Vocab& vocab, AdamState& adam, const TrainConfig& config,
                                     std::size_t batch_index = 0);

enum class TrainMode { Bcl, AllCandidates };

const char* mode_name(TrainMode mode);
TrainMode parse_mode(const std::string& name);

// Everything needed to continue a run.
struct TrainState {
  Model model;
  AdamState adam;
  Vocab vocab;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

struct StepMetrics {
  std::uint64_t step = 0;  // 1-based global step just completed
  std::uint64_t epoch = 0;
  double loss = 0.0;
  ForwardCounts counts;
  double elapsed_seconds = 0.0;
};

// Drives epochs of shuffled batches. The permutation for epoch e depends only
// on (seed, e), so a run resumed from a saved step sees the same batches as
// an uninterrupted one.
class Trainer {
 public:
  Trainer(const Corpus& corpus, const SenseInventory& inventory, TrainConfig config, TrainMode mode,
          TrainState& state);

  std::size_t batches_per_epoch() const { return batches_per_epoch_; }
  std::uint64_t total_steps() const { return static_cast<std::uint64_t>(batches_per_epoch_) * config_.epochs; }
  bool done() const { return state_.step >= total_steps(); }

  // Batch for a global 0-based step.
  Batch batch_at(std::uint64_t step) const;

  StepMetrics step();
  void run(const std::function<void(const StepMetrics&)>& on_step = {});

 private:
  const Corpus& corpus_;
  const SenseInventory& inventory_;
  TrainConfig config_;
  TrainMode mode_;
  TrainState& state_;
  std::vector<const CorpusInstance*> pool_;
  std::size_t batches_per_epoch_ = 0;
};

// Fresh state: vocabulary from corpus + inventory, model seeded from
// config.seed.
TrainState initial_state(const Corpus& corpus, const SenseInventory& inventory, ModelConfig model_config,
                         const TrainConfig& config);

}  // namespace polywsd
