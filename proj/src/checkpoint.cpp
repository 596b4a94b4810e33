#include "polywsd/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "polywsd/errors.hpp"

namespace polywsd {

namespace {

constexpr std::string_view kMagic = "PWSDCKPT";

constexpr std::uint32_t tag(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

constexpr std::uint32_t kConfTag = tag("CONF");
constexpr std::uint32_t kRunTag = tag("RUN ");
constexpr std::uint32_t kVocabTag = tag("VOCB");
constexpr std::uint32_t kParamTag = tag("PARM");
constexpr std::uint32_t kAdamTag = tag("ADAM");

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  void section(std::uint32_t id, const Writer& body) {
    u32(id);
    str(body.out_);
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view str() { return take(u64()); }
  std::string_view take(std::uint64_t n) {
    if (n > in_.size() - pos_) throw IntegrityError("checkpoint truncated");
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  bool empty() const { return pos_ == in_.size(); }
  void expect_end(const char* what) const {
    if (!empty()) throw IntegrityError(std::string("trailing bytes in checkpoint section ") + what);
  }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_encoder_config(Writer& w, const EncoderConfig& c) {
  for (std::size_t v : {c.vocab_size, c.d_model, c.n_layers, c.n_heads, c.d_ff, c.max_seq_len}) w.u64(v);
}

EncoderConfig read_encoder_config(Reader& r) {
  EncoderConfig c;
  c.vocab_size = r.u64();
  c.d_model = r.u64();
  c.n_layers = r.u64();
  c.n_heads = r.u64();
  c.d_ff = r.u64();
  c.max_seq_len = r.u64();
  return c;
}

}  // namespace

std::string serialize_checkpoint(const TrainState& state) {
  // parameters() hands out mutable pointers; nothing is written through them.
  auto params = const_cast<Model&>(state.model).parameters();

  Writer conf;
  write_encoder_config(conf, state.model.config.context);
  write_encoder_config(conf, state.model.config.gloss);
  conf.u64(state.model.config.fusion.poly_m);
  conf.u64(state.model.config.fusion.heads);
  conf.u64(state.model.config.fusion.d_model);

  Writer run;
  run.u64(state.seed);
  run.u64(state.step);

  Writer vocab;
  vocab.u64(state.vocab.min_freq());
  vocab.u64(state.vocab.learned_words().size());
  for (const std::string& w : state.vocab.learned_words()) vocab.str(w);

  Writer parm;
  parm.u64(params.size());
  for (const NamedParam& p : params) {
    parm.str(p.name);
    const Shape& s = p.tensor->shape();
    parm.u32(static_cast<std::uint32_t>(s.rank()));
    for (std::size_t d : s.dims()) parm.u64(d);
    for (double v : p.tensor->data()) parm.f64(v);
  }

  Writer adam;
  adam.u64(state.adam.step);
  adam.u64(state.adam.first_moment.size());
  for (std::size_t k = 0; k < state.adam.first_moment.size(); ++k) {
    adam.u64(state.adam.first_moment[k].size());
    for (double v : state.adam.first_moment[k]) adam.f64(v);
    for (double v : state.adam.second_moment[k]) adam.f64(v);
  }

  Writer payload;
  payload.section(kConfTag, conf);
  payload.section(kRunTag, run);
  payload.section(kVocabTag, vocab);
  payload.section(kParamTag, parm);
  payload.section(kAdamTag, adam);

  Writer file;
  file.raw(kMagic);
  file.u32(kCheckpointVersion);
  file.u64(payload.bytes().size());
  file.raw(payload.bytes());
  file.u64(fnv1a(payload.bytes()));
  return file.bytes();
}

TrainState deserialize_checkpoint(std::string_view bytes) {
  Reader file(bytes);
  if (bytes.size() < kMagic.size() || file.take(kMagic.size()) != kMagic) {
    throw IntegrityError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = file.u32();
  if (version != kCheckpointVersion) {
    throw IncompatibleVersionError("checkpoint format version " + std::to_string(version) +
                                   " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::string_view payload = file.take(file.u64());
  if (file.u64() != fnv1a(payload)) throw IntegrityError("checkpoint checksum mismatch");
  file.expect_end("file");

  Reader sections(payload);
  auto next = [&](std::uint32_t want, const char* name) {
    if (sections.u32() != want) throw IntegrityError(std::string("missing checkpoint section ") + name);
    return Reader(sections.str());
  };

  TrainState state;
  ModelConfig config;
  {
    Reader r = next(kConfTag, "CONF");
    config.context = read_encoder_config(r);
    config.gloss = read_encoder_config(r);
    config.fusion.poly_m = r.u64();
    config.fusion.heads = r.u64();
    config.fusion.d_model = r.u64();
    r.expect_end("CONF");
  }
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw IntegrityError(std::string("checkpoint holds an invalid model config: ") + e.what());
  }
  {
    Reader r = next(kRunTag, "RUN");
    state.seed = r.u64();
    state.step = r.u64();
    r.expect_end("RUN");
  }
  {
    Reader r = next(kVocabTag, "VOCB");
    const std::uint64_t min_freq = r.u64();
    std::vector<std::string> words(r.u64());
    for (std::string& w : words) w = std::string(r.str());
    r.expect_end("VOCB");
    state.vocab = Vocab::from_words(std::move(words), min_freq);
  }
  if (config.context.vocab_size != state.vocab.size() || config.gloss.vocab_size != state.vocab.size()) {
    throw IntegrityError("checkpoint vocabulary size does not match its encoder config");
  }

  state.model = Model::init(config, state.seed);
  auto params = state.model.parameters();
  {
    Reader r = next(kParamTag, "PARM");
    if (r.u64() != params.size()) throw IntegrityError("checkpoint parameter count does not match its config");
    for (NamedParam& p : params) {
      if (r.str() != p.name) throw IntegrityError("checkpoint parameter order mismatch at " + p.name);
      const std::uint32_t rank = r.u32();
      std::vector<std::size_t> dims(rank);
      for (std::size_t& d : dims) d = r.u64();
      if (dims != p.tensor->shape().dims()) throw IntegrityError("checkpoint shape mismatch for " + p.name);
      for (double& v : p.tensor->mutable_data()) v = r.f64();
    }
    r.expect_end("PARM");
  }
  {
    Reader r = next(kAdamTag, "ADAM");
    state.adam.step = r.u64();
    const std::uint64_t count = r.u64();
    if (count != 0 && count != params.size()) throw IntegrityError("optimizer state does not match parameters");
    for (std::uint64_t k = 0; k < count; ++k) {
      const std::uint64_t n = r.u64();
      if (n != params[k].tensor->size()) throw IntegrityError("optimizer moment size mismatch");
      std::vector<double> m(n), v(n);
      for (double& x : m) x = r.f64();
      for (double& x : v) x = r.f64();
      state.adam.first_moment.push_back(std::move(m));
      state.adam.second_moment.push_back(std::move(v));
    }
    r.expect_end("ADAM");
  }
  sections.expect_end("payload");
  return state;
}

void save_checkpoint(const std::filesystem::path& path, const TrainState& state) {
  write_file_atomic(path, serialize_checkpoint(state));
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str());
}

}  // namespace polywsd
