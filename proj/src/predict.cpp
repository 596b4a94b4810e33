#include "polywsd/predict.hpp"

#include <map>
#include <memory>

#include "polywsd/errors.hpp"

namespace polywsd {

std::size_t argmax_first(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax over an empty score list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

CandidateScores score_candidates(const CorpusInstance& instance, const SenseInventory& inventory, const Model& model,
                                 const Vocab& vocab) {
  const auto& candidates = inventory.candidates(instance.lemma, instance.pos);
  Tape tape;
  const FusedRepresentation word = represent_target(tape, model, tokenize_context(instance, vocab, model.config));
  CandidateScores out;
  for (const SenseEntry& sense : candidates) {
    const FusedRepresentation gloss = represent_gloss(tape, model, tokenize_gloss(sense.gloss, vocab, model.config));
    out.sense_ids.push_back(sense.id);
    out.scores.push_back(tape.value(score_pair(tape, word, gloss)).item());
  }
  out.chosen_index = argmax_first(out.scores);
  return out;
}

Prediction predict(const CorpusInstance& instance, const SenseInventory& inventory, const Model& model,
                   const Vocab& vocab) {
  const CandidateScores scores = score_candidates(instance, inventory, model, vocab);
  const SenseEntry& chosen = inventory.candidates(instance.lemma, instance.pos)[scores.chosen_index];
  return {instance.id, chosen.id, chosen.gloss, scores.scores[scores.chosen_index]};
}

Predictor model_predictor(const Model& model, const Vocab& vocab, const SenseInventory& inventory) {
  return [&model, &vocab, &inventory](const CorpusInstance& inst) { return predict(inst, inventory, model, vocab); };
}

Predictor mfs_predictor(const Corpus& training, const SenseInventory& inventory) {
  // (lemma, pos) -> per-candidate gold counts, indexed like the inventory.
  auto counts = std::make_shared<std::map<std::pair<std::string, Pos>, std::vector<std::size_t>>>();
  for (const CorpusInstance& inst : training) {
    if (!inst.gold) continue;
    const auto idx = inventory.index_of(inst.lemma, inst.pos, *inst.gold);
    if (!idx) continue;
    auto& c = (*counts)[{inst.lemma, inst.pos}];
    c.resize(inventory.candidates(inst.lemma, inst.pos).size(), 0);
    ++c[*idx];
  }
  return [counts, &inventory](const CorpusInstance& inst) {
    const auto& candidates = inventory.candidates(inst.lemma, inst.pos);
    std::size_t best = 0;
    if (auto it = counts->find({inst.lemma, inst.pos}); it != counts->end()) {
      for (std::size_t i = 1; i < it->second.size(); ++i)
        if (it->second[i] > it->second[best]) best = i;
    }
    return Prediction{inst.id, candidates[best].id, candidates[best].gloss, 0.0};
  };
}

Predictor first_sense_predictor(const SenseInventory& inventory) {
  return [&inventory](const CorpusInstance& inst) {
    const SenseEntry& first = inventory.candidates(inst.lemma, inst.pos).front();
    return Prediction{inst.id, first.id, first.gloss, 0.0};
  };
}

std::vector<PredictionLine> predict_all(const Corpus& corpus, const Predictor& predictor) {
  std::vector<PredictionLine> out;
  out.reserve(corpus.size());
  for (const CorpusInstance& inst : corpus) {
    Prediction p = predictor(inst);
    out.push_back({std::move(p.instance_id), std::move(p.sense_id)});
  }
  return out;
}

}  // namespace polywsd
