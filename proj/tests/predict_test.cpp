#include <random>

#include <gtest/gtest.h>

#include "polywsd/bcl.hpp"
#include "polywsd/errors.hpp"
#include "polywsd/predict.hpp"
#include "test_support.hpp"

using namespace polywsd;
using namespace polywsd::testing;

TEST(ArgmaxFirst, PicksMaximumAndBreaksTiesLow) {
  const double a[] = {0.2, 0.9, 0.1};
  EXPECT_EQ(argmax_first(a), 1u);
  const double b[] = {0.5, 0.5};
  EXPECT_EQ(argmax_first(b), 0u);
}

namespace {

struct Fixture {
  SyntheticData data = small_data(12);
  Vocab vocab = Vocab::build(data.corpus, data.inventory, 1);
  Model model = Model::init(small_config(vocab.size()), 21);
};

}  // namespace

TEST(ScoreCandidates, OneFiniteScorePerSenseInInventoryOrder) {
  Fixture f;
  const CorpusInstance& inst = f.data.corpus[0];
  const CandidateScores cs = score_candidates(inst, f.data.inventory, f.model, f.vocab);
  const auto& senses = f.data.inventory.candidates(inst.lemma, inst.pos);
  ASSERT_EQ(cs.scores.size(), senses.size());
  for (std::size_t j = 0; j < senses.size(); ++j) {
    EXPECT_EQ(cs.sense_ids[j], senses[j].id);
    EXPECT_TRUE(std::isfinite(cs.scores[j]));
  }
  EXPECT_EQ(cs.chosen_index, argmax_first(cs.scores));
}

TEST(ScoreCandidates, MissingKeyIsInventoryError) {
  Fixture f;
  CorpusInstance inst = f.data.corpus[0];
  inst.lemma = "unknown";
  EXPECT_THROW(score_candidates(inst, f.data.inventory, f.model, f.vocab), InventoryError);
}

TEST(Predict, MonosemousAlwaysIndexZero) {
  Fixture f;
  SenseInventory inv;
  inv.add("solo", Pos::Verb, {{"solo%1", {"only", "one"}}});
  const CorpusInstance inst{"m1", {"a", "solo", "b"}, 1, "solo", Pos::Verb, std::nullopt};
  const Prediction p = predict(inst, inv, f.model, f.vocab);
  EXPECT_EQ(p.sense_id, "solo%1");
  EXPECT_EQ(p.gloss, (std::vector<std::string>{"only", "one"}));
}

TEST(Predict, ZeroOutputProjectionFallsToFirstSense) {
  Fixture f;
  f.model.fusion.output = Tensor(f.model.fusion.output.shape());
  for (const CorpusInstance& inst : f.data.corpus) {
    const CandidateScores cs = score_candidates(inst, f.data.inventory, f.model, f.vocab);
    for (double s : cs.scores) EXPECT_EQ(s, 0.0);
    EXPECT_EQ(cs.chosen_index, 0u);
  }
}

// score_candidates and a 1 x m fusion matrix over the same pairs.
TEST(Predict, MatchesFusionMatrixEntries) {
  Fixture f;
  for (const CorpusInstance& inst : f.data.corpus) {
    const CandidateScores cs = score_candidates(inst, f.data.inventory, f.model, f.vocab);
    Tape tape;
    const FusedRepresentation word = represent_target(tape, f.model, tokenize_context(inst, f.vocab, f.model.config));
    std::vector<FusedRepresentation> glosses;
    for (const SenseEntry& s : f.data.inventory.candidates(inst.lemma, inst.pos))
      glosses.push_back(represent_gloss(tape, f.model, tokenize_gloss(s.gloss, f.vocab, f.model.config)));
    const Tensor& m = tape.value(fusion_matrix(tape, std::span<const FusedRepresentation>(&word, 1), glosses));
    for (std::size_t j = 0; j < glosses.size(); ++j) EXPECT_NEAR(m.at(0, j), cs.scores[j], 1e-12);
  }
}

TEST(Predict, ArgmaxInvariantUnderPositiveScalingAndShift) {
  Fixture f;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> factor(0.01, 100.0), shift(-10.0, 10.0);
  for (const CorpusInstance& inst : f.data.corpus) {
    Tape tape;
    const FusedRepresentation word = represent_target(tape, f.model, tokenize_context(inst, f.vocab, f.model.config));
    const FusedRepresentation scaled{scale(tape, word.codes, factor(rng))};
    std::vector<double> base, scaled_scores, shifted;
    const double c = shift(rng);
    for (const SenseEntry& s : f.data.inventory.candidates(inst.lemma, inst.pos)) {
      const FusedRepresentation g = represent_gloss(tape, f.model, tokenize_gloss(s.gloss, f.vocab, f.model.config));
      base.push_back(tape.value(score_pair(tape, word, g)).item());
      scaled_scores.push_back(tape.value(score_pair(tape, scaled, g)).item());
      shifted.push_back(base.back() + c);
    }
    EXPECT_EQ(argmax_first(base), argmax_first(scaled_scores));
    EXPECT_EQ(argmax_first(base), argmax_first(shifted));
  }
}

namespace {

SenseInventory three_senses() {
  SenseInventory inv;
  inv.add("bank", Pos::Noun, {{"s1", {"river", "side"}}, {"s2", {"money", "house"}}, {"s3", {"tilt"}}});
  inv.add("run", Pos::Verb, {{"r1", {"move", "fast"}}, {"r2", {"operate"}}});
  return inv;
}

CorpusInstance labelled(std::string id, std::string lemma, Pos pos, std::string gold) {
  return {std::move(id), {"x", lemma}, 1, lemma, pos, std::move(gold)};
}

}  // namespace

TEST(MfsPredictor, CountsTiesAndFallback) {
  const SenseInventory inv = three_senses();
  const Corpus training{labelled("a", "bank", Pos::Noun, "s2"), labelled("b", "bank", Pos::Noun, "s1"),
                        labelled("c", "bank", Pos::Noun, "s2"), labelled("d", "run", Pos::Verb, "r2"),
                        labelled("e", "run", Pos::Verb, "r1")};
  const Predictor mfs = mfs_predictor(training, inv);
  EXPECT_EQ(mfs(labelled("q", "bank", Pos::Noun, "")).sense_id, "s2");
  EXPECT_EQ(mfs(labelled("q", "run", Pos::Verb, "")).sense_id, "r1");

  SenseInventory wider = three_senses();
  wider.add("new", Pos::Adj, {{"n1", {"fresh"}}, {"n2", {"novel"}}});
  EXPECT_EQ(mfs_predictor(training, wider)(labelled("q", "new", Pos::Adj, "")).sense_id, "n1");
}

TEST(FirstSensePredictor, AlwaysFirstListed) {
  const SenseInventory inv = three_senses();
  const Predictor s1 = first_sense_predictor(inv);
  EXPECT_EQ(s1(labelled("q", "bank", Pos::Noun, "")).sense_id, "s1");
  EXPECT_EQ(s1(labelled("q", "run", Pos::Verb, "")).sense_id, "r1");
  EXPECT_THROW(s1(labelled("q", "bank", Pos::Verb, "")), InventoryError);

  // Counts ranking senses in inventory order make MFS agree with S1.
  const Corpus training{labelled("a", "bank", Pos::Noun, "s1"), labelled("b", "bank", Pos::Noun, "s1"),
                        labelled("c", "bank", Pos::Noun, "s2"), labelled("d", "run", Pos::Verb, "r1")};
  const Predictor mfs = mfs_predictor(training, inv);
  for (const char* lemma : {"bank", "run"}) {
    const Pos pos = std::string(lemma) == "bank" ? Pos::Noun : Pos::Verb;
    EXPECT_EQ(mfs(labelled("q", lemma, pos, "")).sense_id, s1(labelled("q", lemma, pos, "")).sense_id);
  }
}

TEST(PredictAll, OneLinePerInstanceInOrder) {
  Fixture f;
  const auto lines = predict_all(f.data.corpus, model_predictor(f.model, f.vocab, f.data.inventory));
  ASSERT_EQ(lines.size(), f.data.corpus.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(lines[i].instance_id, f.data.corpus[i].id);
    EXPECT_TRUE(f.data.inventory.index_of(f.data.corpus[i].lemma, f.data.corpus[i].pos, lines[i].sense_id));
  }
}
