#include "polywsd/encoder.hpp"

#include <cmath>

#include "polywsd/attention.hpp"
#include "polywsd/errors.hpp"
#include "init_util.hpp"

namespace polywsd {

namespace {

Tensor ones(std::size_t n) { return Tensor(Shape{n}, 1.0); }
Tensor zeros(std::size_t n) { return Tensor(Shape{n}, 0.0); }

}  // namespace

void EncoderConfig::validate() const {
  if (vocab_size <= kFirstWordId) throw ConfigError("encoder vocab_size must exceed the 4 reserved ids");
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || d_ff == 0) {
    throw ConfigError("encoder sizes must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("encoder d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                      std::to_string(n_heads));
  }
  if (max_seq_len < 3) throw ConfigError("encoder max_seq_len must be at least 3");
}

EncoderParams init_encoder(const EncoderConfig& config, std::mt19937_64& rng) {
  config.validate();
  const std::size_t d = config.d_model, dh = config.d_head();
  EncoderParams p;
  p.config = config;
  p.token_embedding = detail::uniform(Shape{config.vocab_size, d}, 0.05, rng);
  p.position_embedding = detail::uniform(Shape{config.max_seq_len, d}, 0.05, rng);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    EncoderLayer layer;
    layer.ln_attn_gain = ones(d);
    layer.ln_attn_bias = zeros(d);
    for (std::size_t h = 0; h < config.n_heads; ++h) {
      layer.attention.query.push_back(detail::glorot(d, dh, rng));
      layer.attention.key.push_back(detail::glorot(d, dh, rng));
      layer.attention.value.push_back(detail::glorot(d, dh, rng));
    }
    layer.attention.output = detail::glorot(d, d, rng);
    layer.ln_ff_gain = ones(d);
    layer.ln_ff_bias = zeros(d);
    layer.ff_in = detail::glorot(d, config.d_ff, rng);
    layer.ff_in_bias = zeros(config.d_ff);
    layer.ff_out = detail::glorot(config.d_ff, d, rng);
    layer.ff_out_bias = zeros(d);
    p.layers.push_back(std::move(layer));
  }
  p.final_gain = ones(d);
  p.final_bias = zeros(d);
  return p;
}

EncoderParams zero_encoder(const EncoderConfig& config) {
  std::mt19937_64 rng(0);
  EncoderParams p = init_encoder(config, rng);
  std::vector<NamedParam> all;
  collect_parameters(p, "", all);
  for (NamedParam& np : all)
    for (double& v : np.tensor->mutable_data()) v = 0.0;
  return p;
}

void collect_parameters(EncoderParams& params, const std::string& prefix, std::vector<NamedParam>& out) {
  out.push_back({prefix + "token_embedding", &params.token_embedding});
  out.push_back({prefix + "position_embedding", &params.position_embedding});
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    EncoderLayer& layer = params.layers[l];
    const std::string lp = prefix + "layer" + std::to_string(l) + ".";
    out.push_back({lp + "ln_attn_gain", &layer.ln_attn_gain});
    out.push_back({lp + "ln_attn_bias", &layer.ln_attn_bias});
    for (std::size_t h = 0; h < layer.attention.query.size(); ++h) {
      const std::string hp = lp + "head" + std::to_string(h) + ".";
      out.push_back({hp + "query", &layer.attention.query[h]});
      out.push_back({hp + "key", &layer.attention.key[h]});
      out.push_back({hp + "value", &layer.attention.value[h]});
    }
    out.push_back({lp + "attn_output", &layer.attention.output});
    out.push_back({lp + "ln_ff_gain", &layer.ln_ff_gain});
    out.push_back({lp + "ln_ff_bias", &layer.ln_ff_bias});
    out.push_back({lp + "ff_in", &layer.ff_in});
    out.push_back({lp + "ff_in_bias", &layer.ff_in_bias});
    out.push_back({lp + "ff_out", &layer.ff_out});
    out.push_back({lp + "ff_out_bias", &layer.ff_out_bias});
  }
  out.push_back({prefix + "final_gain", &params.final_gain});
  out.push_back({prefix + "final_bias", &params.final_bias});
}

EncoderOutput encode(Tape& tape, const EncoderParams& params, std::span<const TokenId> word_ids) {
  const EncoderConfig& cfg = params.config;
  const std::size_t n = word_ids.size();
  if (n == 0) throw ContractError("encode: empty input sequence");
  if (n + 2 > cfg.max_seq_len) {
    throw ContractError("encode: " + std::to_string(n) + " words exceed max_seq_len " +
                        std::to_string(cfg.max_seq_len) + " - 2; truncate before encoding");
  }

  std::vector<std::size_t> ids;
  ids.reserve(n + 2);
  ids.push_back(kClsId);
  ids.insert(ids.end(), word_ids.begin(), word_ids.end());
  ids.push_back(kSepId);

  Var x = add(tape, gather_rows(tape, tape.leaf(params.token_embedding), ids),
              slice_rows(tape, tape.leaf(params.position_embedding), 0, n + 2));

  for (const EncoderLayer& layer : params.layers) {
    Var a = layer_norm(tape, x, tape.leaf(layer.ln_attn_gain), tape.leaf(layer.ln_attn_bias));
    std::vector<Var> heads;
    for (std::size_t h = 0; h < layer.attention.query.size(); ++h) {
      Var q = matmul(tape, a, tape.leaf(layer.attention.query[h]));
      Var k = matmul(tape, a, tape.leaf(layer.attention.key[h]));
      Var v = matmul(tape, a, tape.leaf(layer.attention.value[h]));
      heads.push_back(scaled_dot_attention(tape, q, k, v));
    }
    x = add(tape, x, matmul(tape, concat_cols(tape, heads), tape.leaf(layer.attention.output)));

    Var f = layer_norm(tape, x, tape.leaf(layer.ln_ff_gain), tape.leaf(layer.ln_ff_bias));
    f = gelu(tape, add_row(tape, matmul(tape, f, tape.leaf(layer.ff_in)), tape.leaf(layer.ff_in_bias)));
    f = add_row(tape, matmul(tape, f, tape.leaf(layer.ff_out)), tape.leaf(layer.ff_out_bias));
    x = add(tape, x, f);
  }

  return {layer_norm(tape, x, tape.leaf(params.final_gain), tape.leaf(params.final_bias)), n};
}

Var target_representation(Tape& tape, const EncoderOutput& encoded, std::size_t t) {
  if (t >= encoded.word_count) {
    throw IndexError("target index " + std::to_string(t) + " out of range for " +
                     std::to_string(encoded.word_count) + " words");
  }
  return row(tape, encoded.tokens, t + 1);
}

Var cls_representation(Tape& tape, const EncoderOutput& encoded) { return row(tape, encoded.tokens, 0); }

}  // namespace polywsd
