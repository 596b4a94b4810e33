#include "polywsd/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "polywsd/errors.hpp"

namespace polywsd {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const char* section, std::initializer_list<const char*> known) {
  if (!j.is_object()) throw ConfigError(std::string("config section ") + section + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(std::string("unknown key ") + section + "." + key);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for ") + key + ": " + e.what());
  }
}

void read_encoder(const json& j, EncoderConfig& c) {
  reject_unknown(j, "encoder", {"d_model", "n_layers", "n_heads", "d_ff", "max_seq_len"});
  read(j, "d_model", c.d_model);
  read(j, "n_layers", c.n_layers);
  read(j, "n_heads", c.n_heads);
  read(j, "d_ff", c.d_ff);
  read(j, "max_seq_len", c.max_seq_len);
}

json encoder_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model}, {"n_layers", c.n_layers}, {"n_heads", c.n_heads}, {"d_ff", c.d_ff},
          {"max_seq_len", c.max_seq_len}};
}

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.model.context = EncoderConfig{};
  c.model.gloss = EncoderConfig{};
  c.model.fusion = FusionConfig{2, 2, c.model.context.d_model};
  return c;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c = default_run_config();
  reject_unknown(j, "config", {"encoder", "gloss_encoder", "fusion", "train"});
  if (j.contains("encoder")) read_encoder(j.at("encoder"), c.model.context);
  c.model.gloss = c.model.context;
  if (j.contains("gloss_encoder")) read_encoder(j.at("gloss_encoder"), c.model.gloss);
  c.model.fusion.d_model = c.model.context.d_model;
  if (j.contains("fusion")) {
    const json& f = j.at("fusion");
    reject_unknown(f, "fusion", {"poly_m", "heads"});
    read(f, "poly_m", c.model.fusion.poly_m);
    read(f, "heads", c.model.fusion.heads);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, "train",
                   {"batch_size", "epochs", "learning_rate", "beta1", "beta2", "epsilon", "seed", "grad_clip",
                    "min_freq"});
    read(t, "batch_size", c.train.batch_size);
    read(t, "epochs", c.train.epochs);
    read(t, "learning_rate", c.train.learning_rate);
    read(t, "beta1", c.train.beta1);
    read(t, "beta2", c.train.beta2);
    read(t, "epsilon", c.train.epsilon);
    read(t, "seed", c.train.seed);
    read(t, "grad_clip", c.train.grad_clip);
    read(t, "min_freq", c.train.min_freq);
  }
  c.model.fusion.validate();
  c.train.validate();
  if (c.model.gloss.d_model != c.model.context.d_model) {
    throw ConfigError("gloss encoder d_model must match the context encoder");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  const TrainConfig& t = c.train;
  return {{"encoder", encoder_json(c.model.context)},
          {"gloss_encoder", encoder_json(c.model.gloss)},
          {"fusion", {{"poly_m", c.model.fusion.poly_m}, {"heads", c.model.fusion.heads}}},
          {"train",
           {{"batch_size", t.batch_size},
            {"epochs", t.epochs},
            {"learning_rate", t.learning_rate},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"epsilon", t.epsilon},
            {"seed", t.seed},
            {"grad_clip", t.grad_clip},
            {"min_freq", t.min_freq}}}};
}

std::string run_fingerprint(const RunConfig& config, const std::string& corpus_bytes,
                            const std::string& inventory_bytes) {
  json j = to_json(config);
  j["train"].erase("seed");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, j.dump());
  h = fnv1a(h, corpus_bytes);
  h = fnv1a(h, inventory_bytes);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace polywsd
