#include "polywsd/bcl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "polywsd/errors.hpp"

namespace polywsd {

Var fusion_matrix(Tape& tape, std::span<const FusedRepresentation> words,
                  std::span<const FusedRepresentation> glosses) {
  if (words.empty() || glosses.empty()) throw BatchError("fusion_matrix: empty representation list");
  const Shape& shape = tape.shape(words[0].codes);
  if (shape.rank() != 2) throw DimensionError("fusion_matrix: codes must be [poly_m x d], got " + shape.str());
  std::vector<Var> word_rows, gloss_rows;
  for (const FusedRepresentation& w : words) {
    if (tape.shape(w.codes) != shape) {
      throw DimensionError("fusion_matrix: word codes " + tape.shape(w.codes).str() + " vs " + shape.str());
    }
    word_rows.push_back(flatten_codes(tape, w));
  }
  for (const FusedRepresentation& g : glosses) {
    if (tape.shape(g.codes) != shape) {
      throw DimensionError("fusion_matrix: gloss codes " + tape.shape(g.codes).str() + " vs " + shape.str());
    }
    gloss_rows.push_back(flatten_codes(tape, g));
  }
  // Same accumulation order and scaling as score_pair, so entries match it
  // bit for bit.
  const double inv_codes = 1.0 / static_cast<double>(shape[0]);
  Var product = matmul(tape, concat_rows(tape, word_rows), transpose(tape, concat_rows(tape, gloss_rows)));
  return scale(tape, product, inv_codes);
}

std::vector<bool> duplicate_gloss_mask(std::span<const std::vector<std::string>> glosses) {
  const std::size_t b = glosses.size();
  std::vector<bool> mask(b * b, false);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j)
      if (i != j && glosses[i] == glosses[j]) mask[i * b + j] = true;
  return mask;
}

BclLoss bcl_loss(Tape& tape, Var m_f, const std::vector<bool>& mask) {
  const Shape& s = tape.shape(m_f);
  if (s.rank() != 2 || s[0] != s[1]) throw BatchError("bcl_loss: fusion matrix must be square, got " + s.str());
  const std::size_t b = s[0];
  if (!mask.empty()) {
    for (std::size_t i = 0; i < b; ++i)
      if (mask[i * b + i]) throw ContractError("bcl_loss: diagonal entry " + std::to_string(i) + " is masked");
  }
  std::vector<std::size_t> diagonal(b);
  std::iota(diagonal.begin(), diagonal.end(), std::size_t{0});
  Var per_example = cross_entropy_rows(tape, m_f, diagonal, mask);
  return {per_example, mean(tape, per_example)};
}

ScoreMatrix make_score_matrix(Tensor m_f, std::vector<bool> mask) {
  ScoreMatrix sm;
  sm.p = softmax_rows(m_f, mask);
  const std::size_t b = m_f.rows();
  if (m_f.cols() != b) throw BatchError("score matrix must be square, got " + m_f.shape().str());
  std::vector<double> diag(b);
  for (std::size_t i = 0; i < b; ++i) diag[i] = sm.p.at(i, i);
  sm.p_d = Tensor::vector(std::move(diag));
  sm.m_f = std::move(m_f);
  sm.mask = std::move(mask);
  return sm;
}

LossValue bcl_loss(const ScoreMatrix& scores) {
  Tape tape;
  const BclLoss l = bcl_loss(tape, tape.input(scores.m_f), scores.mask);
  const Tensor& per = tape.value(l.per_example);
  return {tape.value(l.loss).item(), std::vector<double>(per.data().begin(), per.data().end())};
}

Batch make_batch(std::span<const CorpusInstance* const> instances, const SenseInventory& inventory) {
  Batch batch;
  for (const CorpusInstance* inst : instances) {
    if (!inst->gold) throw DataError("instance " + inst->id + " has no gold sense");
    const auto idx = inventory.index_of(inst->lemma, inst->pos, *inst->gold);
    if (!idx) {
      throw DataError("instance " + inst->id + ": gold sense " + *inst->gold + " not in inventory for " +
                      inst->lemma + "/" + pos_name(inst->pos));
    }
    batch.instances.push_back(inst);
    batch.gold_glosses.push_back(inventory.candidates(inst->lemma, inst->pos)[*idx].gloss);
  }
  return batch;
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2 for contrastive training");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(learning_rate > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0)) {
    throw ConfigError("learning rate, betas and epsilon must be positive (betas below 1)");
  }
  if (grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (min_freq == 0) throw ConfigError("min_freq must be at least 1");
}

BclForward bcl_forward(Tape& tape, const Batch& batch, const Model& model, const Vocab& vocab) {
  if (batch.instances.size() != batch.gold_glosses.size()) {
    throw BatchError("batch has " + std::to_string(batch.instances.size()) + " instances but " +
                     std::to_string(batch.gold_glosses.size()) + " glosses");
  }
  BclForward out;
  std::vector<FusedRepresentation> words, glosses;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    words.push_back(represent_target(tape, model, tokenize_context(*batch.instances[i], vocab, model.config)));
    ++out.counts.context;
    glosses.push_back(represent_gloss(tape, model, tokenize_gloss(batch.gold_glosses[i], vocab, model.config)));
    ++out.counts.gloss;
  }
  out.m_f = fusion_matrix(tape, words, glosses);
  out.loss = bcl_loss(tape, out.m_f, duplicate_gloss_mask(batch.gold_glosses));
  return out;
}

CandidateForward all_candidates_forward(Tape& tape, const Batch& batch, const SenseInventory& inventory,
                                        const Model& model, const Vocab& vocab) {
  CandidateForward out;
  std::vector<Var> terms;
  for (const CorpusInstance* inst : batch.instances) {
    const auto& candidates = inventory.candidates(inst->lemma, inst->pos);
    const auto gold = inst->gold ? inventory.index_of(inst->lemma, inst->pos, *inst->gold) : std::nullopt;
    if (!gold) throw DataError("instance " + inst->id + ": gold sense missing from its candidate set");

    const FusedRepresentation word = represent_target(tape, model, tokenize_context(*inst, vocab, model.config));
    ++out.counts.context;
    std::vector<FusedRepresentation> glosses;
    for (const SenseEntry& s : candidates) {
      glosses.push_back(represent_gloss(tape, model, tokenize_gloss(s.gloss, vocab, model.config)));
      ++out.counts.gloss;
    }
    Var scores = fusion_matrix(tape, std::span<const FusedRepresentation>(&word, 1), glosses);
    const std::size_t target[] = {*gold};
    terms.push_back(reshape(tape, cross_entropy_rows(tape, scores, target), Shape{1, 1}));
  }
  if (terms.empty()) throw BatchError("all_candidates_forward: empty batch");
  out.per_example = reshape(tape, concat_rows(tape, terms), Shape{terms.size()});
  out.loss = mean(tape, out.per_example);
  return out;
}

namespace {

LossValue read_loss(const Tape& tape, Var per_example, Var loss) {
  const Tensor& per = tape.value(per_example);
  return {tape.value(loss).item(), std::vector<double>(per.data().begin(), per.data().end())};
}

void check_finite(const LossValue& loss, Model& model, std::size_t batch_index) {
  if (std::isfinite(loss.total)) return;
  std::ostringstream os;
  os << "non-finite loss " << loss.total << " at batch " << batch_index << " (parameter norm "
     << model.parameter_norm() << ")";
  throw TrainingError(os.str());
}

void apply_update(Model& model, AdamState& adam, const TrainConfig& config) {
  auto params = model.parameters();
  if (config.grad_clip > 0.0) clip_grad_norm(params, config.grad_clip);
  adam_update(params, adam, config.adam());
}

}  // namespace

StepResult train_step(const Batch& batch, Model& model, const Vocab& vocab, AdamState& adam,
                      const TrainConfig& config, std::size_t batch_index) {
  if (batch.size() < 2) throw BatchError("contrastive training needs at least 2 instances per batch");
  model.zero_grad();
  Tape tape;
  const BclForward fwd = bcl_forward(tape, batch, model, vocab);
  StepResult result{read_loss(tape, fwd.loss.per_example, fwd.loss.loss), fwd.counts};
  check_finite(result.loss, model, batch_index);
  tape.backward(fwd.loss.loss);
  apply_update(model, adam, config);
  return result;
}

StepResult train_all_candidates_step(const Batch& batch, const SenseInventory& inventory, Model& model,
                                     const Vocab& vocab, AdamState& adam, const TrainConfig& config,
                                     std::size_t batch_index) {
  model.zero_grad();
  Tape tape;
  const CandidateForward fwd = all_candidates_forward(tape, batch, inventory, model, vocab);
  StepResult result{read_loss(tape, fwd.per_example, fwd.loss), fwd.counts};
  check_finite(result.loss, model, batch_index);
  tape.backward(fwd.loss);
  apply_update(model, adam, config);
  return result;
}

const char* mode_name(TrainMode mode) { return mode == TrainMode::Bcl ? "bcl" : "all-candidates"; }

TrainMode parse_mode(const std::string& name) {
  if (name == "bcl") return TrainMode::Bcl;
  if (name == "all-candidates") return TrainMode::AllCandidates;
  throw ConfigError("unknown training mode '" + name + "' (expected bcl or all-candidates)");
}

// ---------------------------------------------------------------------------

Trainer::Trainer(const Corpus& corpus, const SenseInventory& inventory, TrainConfig config, TrainMode mode,
                 TrainState& state)
    : corpus_(corpus), inventory_(inventory), config_(config), mode_(mode), state_(state) {
  config_.validate();
  for (const CorpusInstance& inst : corpus_) pool_.push_back(&inst);
  const std::size_t n = pool_.size(), b = config_.batch_size;
  batches_per_epoch_ = n / b + (n % b >= 2 ? 1 : 0);
  if (batches_per_epoch_ == 0) throw DataError("training corpus needs at least 2 instances");
}

Batch Trainer::batch_at(std::uint64_t step) const {
  const std::uint64_t epoch = step / batches_per_epoch_;
  const std::size_t index = static_cast<std::size_t>(step % batches_per_epoch_);
  std::vector<const CorpusInstance*> order = pool_;
  std::mt19937_64 rng(state_.seed ^ (0x9E3779B97F4A7C15ULL * (epoch + 1)));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t begin = index * config_.batch_size;
  const std::size_t end = std::min(order.size(), begin + config_.batch_size);
  return make_batch(std::span<const CorpusInstance* const>(order).subspan(begin, end - begin), inventory_);
}

StepMetrics Trainer::step() {
  if (done()) throw ContractError("training already finished");
  const auto started = std::chrono::steady_clock::now();
  const Batch batch = batch_at(state_.step);
  const std::size_t index = static_cast<std::size_t>(state_.step % batches_per_epoch_);
  const StepResult r = mode_ == TrainMode::Bcl
                           ? train_step(batch, state_.model, state_.vocab, state_.adam, config_, index)
                           : train_all_candidates_step(batch, inventory_, state_.model, state_.vocab, state_.adam,
                                                       config_, index);
  StepMetrics m;
  m.epoch = state_.step / batches_per_epoch_;
  ++state_.step;
  m.step = state_.step;
  m.loss = r.loss.total;
  m.counts = r.counts;
  m.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return m;
}

void Trainer::run(const std::function<void(const StepMetrics&)>& on_step) {
  while (!done()) {
    const StepMetrics m = step();
    if (on_step) on_step(m);
  }
}

TrainState initial_state(const Corpus& corpus, const SenseInventory& inventory, ModelConfig model_config,
                         const TrainConfig& config) {
  config.validate();
  TrainState state;
  state.vocab = Vocab::build(corpus, inventory, config.min_freq);
  model_config.context.vocab_size = state.vocab.size();
  model_config.gloss.vocab_size = state.vocab.size();
  state.model = Model::init(model_config, config.seed);
  state.seed = config.seed;
  return state;
}

}  // namespace polywsd
