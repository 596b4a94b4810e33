#include "polywsd/fusion.hpp"

#include <cmath>

#include "polywsd/attention.hpp"
#include "polywsd/errors.hpp"
#include "init_util.hpp"

namespace polywsd {

namespace {

void expect_shape(const Tensor& t, Shape want, const char* what) {
  if (t.shape() != want) {
    throw DimensionError(std::string("fusion ") + what + " has shape " + t.shape().str() + ", config needs " +
                         want.str());
  }
}

}  // namespace

void FusionConfig::validate() const {
  if (poly_m == 0) throw ConfigError("fusion poly_m must be at least 1");
  if (heads == 0) throw ConfigError("fusion heads must be at least 1");
  if (d_model == 0 || d_model % heads != 0) {
    throw ConfigError("fusion heads " + std::to_string(heads) + " must divide d_model " + std::to_string(d_model));
  }
}

FusionParams init_fusion(const FusionConfig& config, std::mt19937_64& rng) {
  config.validate();
  FusionParams p;
  p.config = config;
  for (std::size_t h = 0; h < config.heads; ++h) {
    p.query.push_back(detail::glorot(config.d_model, config.d_k(), rng));
    p.key.push_back(detail::glorot(config.d_model, config.d_k(), rng));
    p.value.push_back(detail::glorot(config.d_model, config.d_v(), rng));
  }
  p.output = detail::glorot(config.heads * config.d_v(), config.d_model, rng);
  return p;
}

void collect_parameters(FusionParams& params, const std::string& prefix, std::vector<NamedParam>& out) {
  for (std::size_t h = 0; h < params.query.size(); ++h) {
    const std::string hp = prefix + "head" + std::to_string(h) + ".";
    out.push_back({hp + "query", &params.query[h]});
    out.push_back({hp + "key", &params.key[h]});
    out.push_back({hp + "value", &params.value[h]});
  }
  out.push_back({prefix + "output", &params.output});
}

Var replicate_query(Tape& tape, Var r, std::size_t poly_m) {
  if (poly_m == 0) throw ConfigError("poly_m must be at least 1");
  return replicate_rows(tape, r, poly_m);
}

Var attention_head(Tape& tape, Var q, Var k, Var v, const FusionParams& params, std::size_t head) {
  const FusionConfig& cfg = params.config;
  if (head >= params.query.size() || head >= params.key.size() || head >= params.value.size()) {
    throw DimensionError("fusion head " + std::to_string(head) + " has no parameters");
  }
  expect_shape(params.query[head], Shape{cfg.d_model, cfg.d_k()}, "query projection");
  expect_shape(params.key[head], Shape{cfg.d_model, cfg.d_k()}, "key projection");
  expect_shape(params.value[head], Shape{cfg.d_model, cfg.d_v()}, "value projection");
  if (tape.value(k).rows() != tape.value(v).rows()) {
    throw DimensionError("attention_head: K " + tape.shape(k).str() + " and V " + tape.shape(v).str() +
                         " row counts differ");
  }
  Var qp = matmul(tape, q, tape.leaf(params.query[head]));
  Var kp = matmul(tape, k, tape.leaf(params.key[head]));
  Var vp = matmul(tape, v, tape.leaf(params.value[head]));
  return scaled_dot_attention(tape, qp, kp, vp);
}

FusedRepresentation fuse_heads(Tape& tape, std::span<const Var> heads, const FusionParams& params) {
  const FusionConfig& cfg = params.config;
  if (heads.size() != cfg.heads) {
    throw ConfigError("fuse_heads: got " + std::to_string(heads.size()) + " heads, config has " +
                      std::to_string(cfg.heads));
  }
  expect_shape(params.output, Shape{cfg.heads * cfg.d_v(), cfg.d_model}, "output projection");
  return {matmul(tape, concat_cols(tape, heads), tape.leaf(params.output))};
}

FusedRepresentation fuse_target(Tape& tape, const FusionParams& params, const EncoderOutput& context,
                                std::size_t target) {
  Var q = replicate_query(tape, target_representation(tape, context, target), params.config.poly_m);
  std::vector<Var> heads;
  heads.reserve(params.config.heads);
  for (std::size_t h = 0; h < params.config.heads; ++h) {
    heads.push_back(attention_head(tape, q, context.tokens, context.tokens, params, h));
  }
  return fuse_heads(tape, heads, params);
}

FusedRepresentation replicate_gloss(Tape& tape, Var r_g, std::size_t poly_m) {
  return {replicate_query(tape, r_g, poly_m)};
}

Var flatten_codes(Tape& tape, const FusedRepresentation& rep) {
  return reshape(tape, rep.codes, Shape{1, tape.value(rep.codes).size()});
}

Var score_pair(Tape& tape, const FusedRepresentation& word, const FusedRepresentation& gloss) {
  const Shape& ws = tape.shape(word.codes);
  const Shape& gs = tape.shape(gloss.codes);
  if (ws != gs || ws.rank() != 2) {
    throw DimensionError("score_pair: word codes " + ws.str() + " vs gloss codes " + gs.str());
  }
  const double inv_codes = 1.0 / static_cast<double>(ws[0]);
  Var dot = matmul(tape, flatten_codes(tape, word), transpose(tape, flatten_codes(tape, gloss)));
  return reshape(tape, scale(tape, dot, inv_codes), Shape{});
}

}  // namespace polywsd
