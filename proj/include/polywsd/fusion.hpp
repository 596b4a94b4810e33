#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "polywsd/encoder.hpp"
#include "polywsd/tape.hpp"

namespace polywsd {

struct FusionConfig {
  std::size_t poly_m = 2;
  std::size_t heads = 2;
  std::size_t d_model = 16;

  std::size_t d_k() const { return d_model / heads; }
  std::size_t d_v() const { return d_model / heads; }
  void validate() const;

  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

// Per head: query/key [d_model x d_k], value [d_model x d_v]. One shared
// output projection [(heads * d_v) x d_model]. No biases.
struct FusionParams {
  FusionConfig config;
  std::vector<Tensor> query;
  std::vector<Tensor> key;
  std::vector<Tensor> value;
  Tensor output;
};

FusionParams init_fusion(const FusionConfig& config, std::mt19937_64& rng);
void collect_parameters(FusionParams& params, const std::string& prefix, std::vector<NamedParam>& out);

// poly_m codes of width d_model. The gloss side has all rows equal.
struct FusedRepresentation {
  Var codes;
};

// The vector r stacked poly_m times.
Var replicate_query(Tape& tape, Var r, std::size_t poly_m);

// softmax((Q Wq)(K Wk)^T / sqrt(d_k)) (V Wv) for one head -> [poly_m x d_v].
Var attention_head(Tape& tape, Var q, Var k, Var v, const FusionParams& params, std::size_t head);

// Concatenate heads along features and project by the output matrix.
// ConfigError unless exactly params.config.heads heads are given.
FusedRepresentation fuse_heads(Tape& tape, std::span<const Var> heads, const FusionParams& params);

// Word side: slice the target row out of the context encoding, replicate it
// into poly_m queries and attend over the whole context.
FusedRepresentation fuse_target(Tape& tape, const FusionParams& params, const EncoderOutput& context,
                                std::size_t target);

// Gloss side: the [CLS] vector stacked poly_m times.
FusedRepresentation replicate_gloss(Tape& tape, Var r_g, std::size_t poly_m);

// (1/poly_m) * sum_{i,d} word[i,d] * gloss[i,d] as a scalar.
Var score_pair(Tape& tape, const FusedRepresentation& word, const FusedRepresentation& gloss);

// Flattens each representation to one row; used so score_pair and the batch
// fusion matrix share one code path.
Var flatten_codes(Tape& tape, const FusedRepresentation& rep);

}  // namespace polywsd
