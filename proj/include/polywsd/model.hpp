#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polywsd/data.hpp"
#include "polywsd/encoder.hpp"
#include "polywsd/fusion.hpp"

namespace polywsd {

struct ModelConfig {
  EncoderConfig context;
  EncoderConfig gloss;
  FusionConfig fusion;

  // Both encoders and the fusion block must agree on d_model.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Context encoder, gloss encoder (separate weights) and the fusion heads.
struct Model {
  ModelConfig config;
  EncoderParams context;
  EncoderParams gloss;
  FusionParams fusion;

  // Seeded initialization; every tensor has requires_grad set.
  static Model init(const ModelConfig& config, std::uint64_t seed);

  // Stable order: context encoder, gloss encoder, fusion.
  std::vector<NamedParam> parameters();
  void zero_grad();
  double parameter_norm();
};

TokenizedSequence tokenize_context(const CorpusInstance& instance, const Vocab& vocab, const ModelConfig& config);
TokenizedSequence tokenize_gloss(std::span<const std::string> gloss, const Vocab& vocab, const ModelConfig& config);

// Context encode + target slice + poly-code attention.
FusedRepresentation represent_target(Tape& tape, const Model& model, const TokenizedSequence& context);
// Gloss encode + [CLS] slice + replication.
FusedRepresentation represent_gloss(Tape& tape, const Model& model, const TokenizedSequence& gloss);

}  // namespace polywsd
