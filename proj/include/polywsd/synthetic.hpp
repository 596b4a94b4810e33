#pragma once

#include <cstddef>
#include <cstdint>

#include "polywsd/data.hpp"

namespace polywsd {

struct SyntheticSpec {
  std::size_t lemmas = 10;
  std::size_t senses_per_lemma = 3;
  std::size_t instances = 50;
  std::size_t context_words = 8;  // including the target
  std::size_t filler_words = 20;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  Corpus corpus;
  SenseInventory inventory;
};

// Lemma k is "lemma{k}" with POS cycling NOUN, VERB, ADJ, ADV. Each sense owns
// two cue words that appear in its gloss and in every context labelled with
// it, so a model that reads the context can separate the senses. Instances
// are assigned to lemmas and senses round-robin; filler and positions come
// from the seed.
SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace polywsd
