#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "polywsd/data.hpp"
#include "polywsd/model.hpp"

namespace polywsd {

struct CandidateScores {
  std::vector<std::string> sense_ids;
  std::vector<double> scores;
  std::size_t chosen_index = 0;
};

struct Prediction {
  std::string instance_id;
  std::string sense_id;
  std::vector<std::string> gloss;
  double score = 0.0;
};

// Index of the largest value; ties go to the lowest index.
std::size_t argmax_first(std::span<const double> values);

// Encodes the full context once and every candidate gloss of the instance's
// (lemma, POS), scoring each with score_pair. InventoryError when the key is
// missing.
CandidateScores score_candidates(const CorpusInstance& instance, const SenseInventory& inventory, const Model& model,
                                 const Vocab& vocab);

Prediction predict(const CorpusInstance& instance, const SenseInventory& inventory, const Model& model,
                   const Vocab& vocab);

using Predictor = std::function<Prediction(const CorpusInstance&)>;

// Holds references; model, vocab and inventory must outlive the predictor.
Predictor model_predictor(const Model& model, const Vocab& vocab, const SenseInventory& inventory);

// Most frequent gold sense per (lemma, POS) in the training corpus; ties and
// unseen keys fall back to inventory order.
Predictor mfs_predictor(const Corpus& training, const SenseInventory& inventory);

// Always the first listed sense.
Predictor first_sense_predictor(const SenseInventory& inventory);

std::vector<PredictionLine> predict_all(const Corpus& corpus, const Predictor& predictor);

}  // namespace polywsd
