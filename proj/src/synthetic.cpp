#include "polywsd/synthetic.hpp"

#include <random>
#include <string>

#include "polywsd/errors.hpp"

namespace polywsd {

namespace {

std::string cue(std::size_t lemma, std::size_t sense, char which) {
  return "cue" + std::to_string(lemma) + "s" + std::to_string(sense) + which;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.lemmas == 0 || spec.senses_per_lemma == 0 || spec.filler_words == 0) {
    throw ConfigError("synthetic spec needs at least one lemma, sense and filler word");
  }
  if (spec.context_words < 3) throw ConfigError("synthetic contexts need at least 3 words");

  SyntheticData out;
  for (std::size_t k = 0; k < spec.lemmas; ++k) {
    std::vector<SenseEntry> senses;
    for (std::size_t s = 0; s < spec.senses_per_lemma; ++s) {
      senses.push_back({"lemma" + std::to_string(k) + "%" + std::to_string(s),
                        {"a", "sense", "marked", "by", cue(k, s, 'a'), "and", cue(k, s, 'b')}});
    }
    out.inventory.add("lemma" + std::to_string(k), kAllPos[k % 4], std::move(senses));
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::size_t> filler(0, spec.filler_words - 1);
  std::uniform_int_distribution<std::size_t> position(0, spec.context_words - 1);
  for (std::size_t i = 0; i < spec.instances; ++i) {
    const std::size_t k = i % spec.lemmas;
    const std::size_t s = (i / spec.lemmas) % spec.senses_per_lemma;
    CorpusInstance inst;
    inst.id = "syn." + std::to_string(i);
    inst.lemma = "lemma" + std::to_string(k);
    inst.pos = kAllPos[k % 4];
    inst.gold = inst.lemma + "%" + std::to_string(s);
    inst.tokens.resize(spec.context_words);
    for (auto& t : inst.tokens) t = "w" + std::to_string(filler(rng));
    inst.target_index = position(rng);
    inst.tokens[inst.target_index] = inst.lemma;
    // Cue words go in the two slots after the target, wrapping around.
    inst.tokens[(inst.target_index + 1) % spec.context_words] = cue(k, s, 'a');
    inst.tokens[(inst.target_index + 2) % spec.context_words] = cue(k, s, 'b');
    out.corpus.push_back(std::move(inst));
  }
  return out;
}

}  // namespace polywsd
