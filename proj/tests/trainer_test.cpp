#include <set>

#include <gtest/gtest.h>

#include "polywsd/bcl.hpp"
#include "polywsd/checkpoint.hpp"
#include "polywsd/errors.hpp"
#include "test_support.hpp"

using namespace polywsd;
using namespace polywsd::testing;

namespace {

TrainConfig config(std::size_t batch, std::size_t epochs) {
  TrainConfig c;
  c.batch_size = batch;
  c.epochs = epochs;
  c.seed = 17;
  return c;
}

}  // namespace

TEST(Trainer, PartialBatchKeptOnlyWithTwoInstances) {
  const SyntheticData d = small_data(11);
  TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 1));
  EXPECT_EQ(Trainer(d.corpus, d.inventory, config(4, 1), TrainMode::Bcl, s).batches_per_epoch(), 3u);
  EXPECT_EQ(Trainer(d.corpus, d.inventory, config(5, 1), TrainMode::Bcl, s).batches_per_epoch(), 2u);
  EXPECT_EQ(Trainer(d.corpus, d.inventory, config(5, 3), TrainMode::Bcl, s).total_steps(), 6u);
}

TEST(Trainer, EpochCoversEveryInstanceOnce) {
  const SyntheticData d = small_data(12);
  TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 2));
  const Trainer t(d.corpus, d.inventory, config(4, 2), TrainMode::Bcl, s);
  for (std::uint64_t epoch = 0; epoch < 2; ++epoch) {
    std::multiset<std::string> ids;
    for (std::size_t k = 0; k < 3; ++k)
      for (const CorpusInstance* inst : t.batch_at(epoch * 3 + k).instances) ids.insert(inst->id);
    EXPECT_EQ(ids.size(), 12u);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 12u);
  }
  EXPECT_NE(t.batch_at(0).instances, t.batch_at(3).instances);
}

TEST(Trainer, TinyCorpusIsDataError) {
  const SyntheticData d = small_data(1);
  TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 1));
  EXPECT_THROW(Trainer(d.corpus, d.inventory, config(4, 1), TrainMode::Bcl, s), DataError);
}

TEST(Trainer, SameSeedGivesBitIdenticalParameters) {
  const SyntheticData d = small_data(12);
  auto run = [&] {
    TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 2));
    Trainer(d.corpus, d.inventory, config(4, 2), TrainMode::Bcl, s).run();
    return s;
  };
  TrainState a = run(), b = run();
  auto pa = a.model.parameters(), pb = b.model.parameters();
  for (std::size_t k = 0; k < pa.size(); ++k) EXPECT_TRUE(same_bits(*pa[k].tensor, *pb[k].tensor)) << pa[k].name;
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
}

TEST(Trainer, ResumeMatchesUninterruptedRun) {
  const SyntheticData d = small_data(12);
  for (TrainMode mode : {TrainMode::Bcl, TrainMode::AllCandidates}) {
    TrainState full = initial_state(d.corpus, d.inventory, small_config(), config(4, 3));
    Trainer tf(d.corpus, d.inventory, config(4, 3), mode, full);
    for (int i = 0; i < 4; ++i) tf.step();
    const std::string saved = serialize_checkpoint(full);
    const StepMetrics next = tf.step();

    TrainState resumed = deserialize_checkpoint(saved);
    Trainer tr(d.corpus, d.inventory, config(4, 3), mode, resumed);
    const StepMetrics again = tr.step();
    EXPECT_EQ(std::bit_cast<std::uint64_t>(next.loss), std::bit_cast<std::uint64_t>(again.loss));
    EXPECT_EQ(next.step, again.step);
    tf.run();
    tr.run();
    EXPECT_EQ(serialize_checkpoint(full), serialize_checkpoint(resumed));
  }
}

TEST(Trainer, StepCountsMatchMode) {
  const SyntheticData d = small_data(12);
  TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 1));
  Trainer bcl(d.corpus, d.inventory, config(4, 1), TrainMode::Bcl, s);
  const StepMetrics m = bcl.step();
  EXPECT_EQ(m.counts.gloss, 4u);
  TrainState s2 = initial_state(d.corpus, d.inventory, small_config(), config(4, 1));
  Trainer all(d.corpus, d.inventory, config(4, 1), TrainMode::AllCandidates, s2);
  EXPECT_EQ(all.step().counts.gloss, 12u);
  while (!bcl.done()) bcl.step();
  EXPECT_THROW(bcl.step(), ContractError);
}

TEST(InitialState, VocabularySizesTheEncoders) {
  const SyntheticData d = small_data(12);
  const TrainState s = initial_state(d.corpus, d.inventory, small_config(), config(4, 1));
  EXPECT_EQ(s.model.config.context.vocab_size, s.vocab.size());
  EXPECT_EQ(s.model.config.gloss.vocab_size, s.vocab.size());
  EXPECT_EQ(s.seed, 17u);
  EXPECT_EQ(s.step, 0u);
}
