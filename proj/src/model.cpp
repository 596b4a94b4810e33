#include "polywsd/model.hpp"

#include <cmath>
#include <random>

#include "polywsd/errors.hpp"

namespace polywsd {

void ModelConfig::validate() const {
  context.validate();
  gloss.validate();
  fusion.validate();
  if (context.d_model != fusion.d_model || gloss.d_model != fusion.d_model) {
    throw ConfigError("context, gloss and fusion d_model must match (" + std::to_string(context.d_model) + ", " +
                      std::to_string(gloss.d_model) + ", " + std::to_string(fusion.d_model) + ")");
  }
}

Model Model::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  Model m;
  m.config = config;
  m.context = init_encoder(config.context, rng);
  m.gloss = init_encoder(config.gloss, rng);
  m.fusion = init_fusion(config.fusion, rng);
  for (NamedParam& p : m.parameters()) p.tensor->set_requires_grad(true);
  return m;
}

std::vector<NamedParam> Model::parameters() {
  std::vector<NamedParam> out;
  collect_parameters(context, "context.", out);
  collect_parameters(gloss, "gloss.", out);
  collect_parameters(fusion, "fusion.", out);
  return out;
}

void Model::zero_grad() {
  for (NamedParam& p : parameters()) p.tensor->zero_grad();
}

double Model::parameter_norm() {
  double s = 0.0;
  for (NamedParam& p : parameters())
    for (double v : p.tensor->data()) s += v * v;
  return std::sqrt(s);
}

TokenizedSequence tokenize_context(const CorpusInstance& instance, const Vocab& vocab, const ModelConfig& config) {
  return tokenize(instance.tokens, vocab, config.context.max_seq_len, instance.target_index);
}

TokenizedSequence tokenize_gloss(std::span<const std::string> gloss, const Vocab& vocab, const ModelConfig& config) {
  return tokenize(gloss, vocab, config.gloss.max_seq_len);
}

FusedRepresentation represent_target(Tape& tape, const Model& model, const TokenizedSequence& context) {
  if (!context.target) throw ContractError("represent_target: context has no target position");
  const EncoderOutput encoded = encode(tape, model.context, context.words());
  return fuse_target(tape, model.fusion, encoded, *context.target);
}

FusedRepresentation represent_gloss(Tape& tape, const Model& model, const TokenizedSequence& gloss) {
  const EncoderOutput encoded = encode(tape, model.gloss, gloss.words());
  return replicate_gloss(tape, cls_representation(tape, encoded), model.config.fusion.poly_m);
}

}  // namespace polywsd
