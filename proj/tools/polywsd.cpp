// Command-line front end: synth, train, predict, eval, baseline, bench and
// gradcheck.
//
// Exit status: 0 on success, 1 on a data/config/runtime error, 2 on a usage
// error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "polywsd/bcl.hpp"
#include "polywsd/bench.hpp"
#include "polywsd/checkpoint.hpp"
#include "polywsd/config.hpp"
#include "polywsd/errors.hpp"
#include "polywsd/eval.hpp"
#include "polywsd/gradcheck.hpp"
#include "polywsd/predict.hpp"
#include "polywsd/synthetic.hpp"

namespace fs = std::filesystem;
using namespace polywsd;
using nlohmann::json;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_file_atomic(out, j.dump(2) + "\n");
  }
}

struct SynthArgs {
  std::string out_dir;
  SyntheticSpec spec;
  std::size_t heldout = 0;
};

int run_synth(const SynthArgs& a) {
  SyntheticSpec spec = a.spec;
  spec.instances += a.heldout;
  SyntheticData data = make_synthetic(spec);
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  Corpus train(data.corpus.begin(), data.corpus.end() - static_cast<std::ptrdiff_t>(a.heldout));
  save_corpus(dir / "train.jsonl", train);
  save_gold_key(dir / "train.key", train);
  save_inventory(dir / "inventory.jsonl", data.inventory);
  if (a.heldout > 0) {
    Corpus test(data.corpus.end() - static_cast<std::ptrdiff_t>(a.heldout), data.corpus.end());
    save_corpus(dir / "test.jsonl", test);
    save_gold_key(dir / "test.key", test);
  }
  std::cerr << "wrote " << train.size() << " training and " << a.heldout << " held-out instances to " << dir
            << "\n";
  return 0;
}

struct TrainArgs {
  std::string corpus, inventory, config, checkpoint, resume, metrics, mode = "bcl";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::uint64_t device_count = 1;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const TrainMode mode = parse_mode(a.mode);
  RunConfig rc = a.config.empty() ? default_run_config() : load_run_config(a.config);
  if (a.seed) rc.train.seed = *a.seed;
  if (a.epochs) rc.train.epochs = *a.epochs;
  rc.train.validate();

  const std::string corpus_bytes = read_bytes(a.corpus);
  const std::string inventory_bytes = read_bytes(a.inventory);
  const Corpus corpus = load_corpus(a.corpus);
  const SenseInventory inventory = load_inventory(a.inventory);

  TrainState state;
  if (!a.resume.empty()) {
    state = load_checkpoint(a.resume);
    rc.model = state.model.config;
    rc.train.seed = state.seed;
  } else {
    state = initial_state(corpus, inventory, rc.model, rc.train);
    rc.model = state.model.config;
  }

  std::optional<std::ofstream> log;
  if (!a.metrics.empty()) {
    log.emplace(a.metrics, a.resume.empty() ? std::ios::trunc : std::ios::app);
    if (!*log) throw DataError("cannot open metrics log " + a.metrics);
  }

  const RunMetrics run = run_training(corpus, inventory, rc.train, mode, state,
                                     run_fingerprint(rc, corpus_bytes, inventory_bytes), a.device_count,
                                     log ? &*log : nullptr);
  save_checkpoint(a.checkpoint, state);
  if (!a.quiet) {
    std::cerr << "trained " << run.steps << " steps in " << run.wall_seconds << " s, " << run.gloss_forwards
              << " gloss forwards; checkpoint " << a.checkpoint << "\n";
  }
  return 0;
}

struct PredictArgs {
  std::string corpus, inventory, checkpoint, out;
};

int run_predict(const PredictArgs& a) {
  const TrainState state = load_checkpoint(a.checkpoint);
  const Corpus corpus = load_corpus(a.corpus);
  const SenseInventory inventory = load_inventory(a.inventory);
  const auto lines = predict_all(corpus, model_predictor(state.model, state.vocab, inventory));
  save_predictions(a.out, lines);
  return 0;
}

struct EvalArgs {
  std::string predictions, gold, corpus, out;
};

int run_eval(const EvalArgs& a) {
  std::optional<fs::path> corpus;
  if (!a.corpus.empty()) corpus = a.corpus;
  emit_json(to_json(score_f1(a.predictions, a.gold, corpus)), a.out);
  return 0;
}

struct BaselineArgs {
  std::string kind, train_corpus, corpus, inventory, out;
};

int run_baseline(const BaselineArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  const SenseInventory inventory = load_inventory(a.inventory);
  Predictor predictor;
  Corpus training;
  if (a.kind == "mfs") {
    if (a.train_corpus.empty()) throw ConfigError("the mfs baseline needs --train-corpus");
    training = load_corpus(a.train_corpus);
    predictor = mfs_predictor(training, inventory);
  } else {
    predictor = first_sense_predictor(inventory);
  }
  save_predictions(a.out, predict_all(corpus, predictor));
  return 0;
}

struct BenchArgs {
  std::string corpus, inventory, config, candidate, baseline, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::uint64_t device_count = 1;
};

// Either trains both modes on --corpus/--inventory or compares two existing
// metrics logs.
int run_bench(const BenchArgs& a) {
  if (!a.candidate.empty() || !a.baseline.empty()) {
    if (a.candidate.empty() || a.baseline.empty()) throw ConfigError("bench needs both --candidate and --baseline");
    emit_json(to_json(compare_costs(read_run_summary(a.candidate), read_run_summary(a.baseline))), a.out);
    return 0;
  }
  if (a.corpus.empty() || a.inventory.empty()) {
    throw ConfigError("bench needs --corpus and --inventory, or --candidate and --baseline");
  }
  RunConfig rc = a.config.empty() ? default_run_config() : load_run_config(a.config);
  if (a.seed) rc.train.seed = *a.seed;
  if (a.epochs) rc.train.epochs = *a.epochs;
  rc.train.validate();
  const Corpus corpus = load_corpus(a.corpus);
  const SenseInventory inventory = load_inventory(a.inventory);
  const std::string fp = run_fingerprint(rc, read_bytes(a.corpus), read_bytes(a.inventory));
  emit_json(to_json(bench_modes(corpus, inventory, rc, fp, a.device_count)), a.out);
  return 0;
}

struct GradcheckArgs {
  std::uint64_t seed = 1;
  double step = 1e-5;
  double tolerance = 1e-4;
};

// d_model 8, one layer, 2 heads, poly_m 2, vocabulary 50 and a b = 3 batch;
// every parameter coordinate of the BCL loss is checked.
int run_gradcheck(const GradcheckArgs& a) {
  SyntheticSpec spec;
  spec.lemmas = 3;
  spec.senses_per_lemma = 2;
  spec.instances = 3;
  spec.context_words = 5;
  spec.seed = a.seed;
  const SyntheticData data = make_synthetic(spec);

  const Vocab vocab = Vocab::build(data.corpus, data.inventory, 1);
  ModelConfig mc;
  mc.context = {50, 8, 1, 2, 16, 16};
  mc.gloss = mc.context;
  mc.fusion = {2, 2, 8};
  Model model = Model::init(mc, a.seed);

  std::vector<const CorpusInstance*> ptrs;
  for (const auto& inst : data.corpus) ptrs.push_back(&inst);
  const Batch batch = make_batch(ptrs, data.inventory);
  std::vector<Tensor*> params;
  for (const NamedParam& p : model.parameters()) params.push_back(p.tensor);
  const GradCheckReport r = finite_diff_check(
      [&](Tape& tape) { return bcl_forward(tape, batch, model, vocab).loss.loss; }, params, a.step);
  std::cout << "coordinates " << r.coordinates << " max_rel_error " << r.max_rel_error << " (param "
            << r.worst_param << " index " << r.worst_index << ")\n";
  return r.max_rel_error < a.tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poly-encoder word sense disambiguation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic corpus, inventory and gold keys");
  s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  s->add_option("--lemmas", synth.spec.lemmas, "Number of lemmas")->capture_default_str();
  s->add_option("--senses", synth.spec.senses_per_lemma, "Senses per lemma")->capture_default_str();
  s->add_option("--instances", synth.spec.instances, "Training instances")->capture_default_str();
  s->add_option("--heldout", synth.heldout, "Extra held-out instances")->capture_default_str();
  s->add_option("--context-words", synth.spec.context_words, "Words per context")->capture_default_str();
  s->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model and write a checkpoint");
  t->add_option("--corpus", train.corpus, "Training corpus (JSONL)")->required()->check(CLI::ExistingFile);
  t->add_option("--inventory", train.inventory, "Sense inventory (JSONL)")->required()->check(CLI::ExistingFile);
  t->add_option("--config", train.config, "Run config (JSON)")->check(CLI::ExistingFile);
  t->add_option("--checkpoint", train.checkpoint, "Output checkpoint")->required();
  t->add_option("--resume", train.resume, "Continue from this checkpoint")->check(CLI::ExistingFile);
  t->add_option("--mode", train.mode, "bcl or all-candidates")
      ->check(CLI::IsMember({"bcl", "all-candidates"}))
      ->capture_default_str();
  t->add_option("--seed", train.seed, "Override the config seed");
  t->add_option("--epochs", train.epochs, "Override the config epoch count");
  t->add_option("--metrics", train.metrics, "Metrics log (JSONL)");
  t->add_option("--device-count", train.device_count, "Devices, for the GPU-hour analog")->capture_default_str();
  t->add_flag("--quiet", train.quiet, "No progress output");

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Predict a sense for every instance");
  p->add_option("--corpus", pred.corpus, "Corpus (JSONL)")->required()->check(CLI::ExistingFile);
  p->add_option("--inventory", pred.inventory, "Sense inventory (JSONL)")->required()->check(CLI::ExistingFile);
  p->add_option("--checkpoint", pred.checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  p->add_option("--out", pred.out, "Predictions file")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score predictions against a gold key");
  e->add_option("--predictions", ev.predictions, "Predictions file")->required()->check(CLI::ExistingFile);
  e->add_option("--gold", ev.gold, "Gold key")->required()->check(CLI::ExistingFile);
  e->add_option("--corpus", ev.corpus, "Corpus, for per-POS scores")->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "JSON report (default stdout)");

  BaselineArgs base;
  auto* b = app.add_subcommand("baseline", "Predict with the mfs or s1 baseline");
  b->add_option("kind", base.kind, "mfs or s1")->required()->check(CLI::IsMember({"mfs", "s1"}));
  b->add_option("--train-corpus", base.train_corpus, "Labelled corpus for sense counts")->check(CLI::ExistingFile);
  b->add_option("--corpus", base.corpus, "Corpus to predict (JSONL)")->required()->check(CLI::ExistingFile);
  b->add_option("--inventory", base.inventory, "Sense inventory (JSONL)")->required()->check(CLI::ExistingFile);
  b->add_option("--out", base.out, "Predictions file")->required();

  BenchArgs bench;
  auto* c = app.add_subcommand("bench", "Compare the cost of two training runs");
  c->add_option("--corpus", bench.corpus, "Training corpus (JSONL)")->check(CLI::ExistingFile);
  c->add_option("--inventory", bench.inventory, "Sense inventory (JSONL)")->check(CLI::ExistingFile);
  c->add_option("--config", bench.config, "Run config (JSON)")->check(CLI::ExistingFile);
  c->add_option("--seed", bench.seed, "Override the config seed");
  c->add_option("--epochs", bench.epochs, "Override the config epoch count");
  c->add_option("--device-count", bench.device_count, "Devices, for the GPU-hour analog")->capture_default_str();
  c->add_option("--candidate", bench.candidate, "Metrics log of the run under test")->check(CLI::ExistingFile);
  c->add_option("--baseline", bench.baseline, "Metrics log of the reference run")->check(CLI::ExistingFile);
  c->add_option("--out", bench.out, "JSON report (default stdout)");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the training gradient");
  g->add_option("--seed", gc.seed, "Seed")->capture_default_str();
  g->add_option("--step", gc.step, "Central-difference step")->capture_default_str();
  g->add_option("--tolerance", gc.tolerance, "Largest accepted relative error")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(train);
    if (*p) return run_predict(pred);
    if (*e) return run_eval(ev);
    if (*b) return run_baseline(base);
    if (*c) return run_bench(bench);
    if (*g) return run_gradcheck(gc);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
