#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "polywsd/tape.hpp"
#include "polywsd/tokens.hpp"

namespace polywsd {

struct EncoderConfig {
  std::size_t vocab_size = 50;
  std::size_t d_model = 16;
  std::size_t n_layers = 1;
  std::size_t n_heads = 2;
  std::size_t d_ff = 32;
  std::size_t max_seq_len = 32;

  std::size_t d_head() const { return d_model / n_heads; }
  // Throws ConfigError on a zero size, d_model % n_heads != 0,
  // max_seq_len < 3 or vocab_size below the reserved ids.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// Per-head projections, each [d_model x d_head], plus the shared output
// projection [d_model x d_model]. No biases.
struct AttentionParams {
  std::vector<Tensor> query;
  std::vector<Tensor> key;
  std::vector<Tensor> value;
  Tensor output;
};

// Pre-LayerNorm transformer block.
struct EncoderLayer {
  Tensor ln_attn_gain, ln_attn_bias;
  AttentionParams attention;
  Tensor ln_ff_gain, ln_ff_bias;
  Tensor ff_in, ff_in_bias;    // [d_model x d_ff], [d_ff]
  Tensor ff_out, ff_out_bias;  // [d_ff x d_model], [d_model]
};

struct EncoderParams {
  EncoderConfig config;
  Tensor token_embedding;     // [vocab_size x d_model]
  Tensor position_embedding;  // [max_seq_len x d_model]
  std::vector<EncoderLayer> layers;
  Tensor final_gain, final_bias;
};

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

// Glorot-uniform projections, U[-0.05, 0.05] embeddings, unit LayerNorm gains
// and zero biases.
EncoderParams init_encoder(const EncoderConfig& config, std::mt19937_64& rng);
// Every tensor zero, LayerNorm gains included.
EncoderParams zero_encoder(const EncoderConfig& config);

// Appends every tensor in a fixed order, names prefixed with `prefix`.
void collect_parameters(EncoderParams& params, const std::string& prefix, std::vector<NamedParam>& out);

// Rows of an encoded sequence on a tape: row 0 is [CLS], row n + 1 is [SEP],
// rows 1..n are the input words.
struct EncoderOutput {
  Var tokens;
  std::size_t word_count = 0;
};

// Prepends [CLS], appends [SEP] and runs the encoder. word_ids must hold
// between 1 and max_seq_len - 2 ids; longer input is a ContractError (callers
// truncate first).
EncoderOutput encode(Tape& tape, const EncoderParams& params, std::span<const TokenId> word_ids);

// Row t + 1 of the encoder output (offset past [CLS]). IndexError if t >= n.
Var target_representation(Tape& tape, const EncoderOutput& encoded, std::size_t t);

// Row 0 ([CLS]).
Var cls_representation(Tape& tape, const EncoderOutput& encoded);

}  // namespace polywsd
