#include "polywsd/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "polywsd/errors.hpp"

namespace polywsd {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::vector<std::string> string_array(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw ParseError(std::string("field '") + field + "' must be an array of strings");
  }
  std::vector<std::string> out;
  for (const json& e : j.at(field)) {
    if (!e.is_string()) throw ParseError(std::string("field '") + field + "' must contain strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string string_field(const json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_string()) {
    throw ParseError(std::string("field '") + field + "' must be a string");
  }
  return j.at(field).get<std::string>();
}

}  // namespace

const char* pos_name(Pos pos) {
  switch (pos) {
    case Pos::Noun: return "NOUN";
    case Pos::Verb: return "VERB";
    case Pos::Adj: return "ADJ";
    case Pos::Adv: return "ADV";
  }
  return "?";
}

Pos parse_pos(const std::string& tag) {
  for (Pos p : kAllPos)
    if (tag == pos_name(p)) return p;
  throw DataError("unknown part of speech '" + tag + "' (expected NOUN, VERB, ADJ or ADV)");
}

void CorpusInstance::validate() const {
  if (id.empty()) throw DataError("instance has an empty id");
  if (target_index >= tokens.size()) {
    throw DataError("instance " + id + ": target_index " + std::to_string(target_index) + " out of range for " +
                    std::to_string(tokens.size()) + " tokens");
  }
}

// ---------------------------------------------------------------------------

void SenseInventory::add(std::string lemma, Pos pos, std::vector<SenseEntry> senses) {
  const auto key = std::make_pair(lemma, pos);
  const std::string name = lemma + "/" + pos_name(pos);
  if (index_.contains(key)) throw InventoryError("duplicate inventory key " + name);
  if (senses.empty()) throw InventoryError("inventory key " + name + " has no senses");
  std::set<std::string> seen;
  for (const SenseEntry& s : senses) {
    if (!seen.insert(s.id).second) throw InventoryError("duplicate sense id " + s.id + " under " + name);
    if (s.gloss.empty()) throw InventoryError("sense " + s.id + " under " + name + " has an empty gloss");
  }
  index_.emplace(key, entries_.size());
  entries_.push_back({std::move(lemma), pos, std::move(senses)});
}

const std::vector<SenseEntry>* SenseInventory::find(const std::string& lemma, Pos pos) const {
  auto it = index_.find({lemma, pos});
  return it == index_.end() ? nullptr : &entries_[it->second].senses;
}

const std::vector<SenseEntry>& SenseInventory::candidates(const std::string& lemma, Pos pos) const {
  if (const auto* senses = find(lemma, pos)) return *senses;
  throw InventoryError("no inventory entry for " + lemma + "/" + pos_name(pos));
}

std::optional<std::size_t> SenseInventory::index_of(const std::string& lemma, Pos pos,
                                                    const std::string& sense_id) const {
  const auto* senses = find(lemma, pos);
  if (!senses) return std::nullopt;
  for (std::size_t i = 0; i < senses->size(); ++i)
    if ((*senses)[i].id == sense_id) return i;
  return std::nullopt;
}

bool operator==(const SenseEntry& a, const SenseEntry& b) { return a.id == b.id && a.gloss == b.gloss; }

bool operator==(const SenseInventory::Entry& a, const SenseInventory::Entry& b) {
  return a.lemma == b.lemma && a.pos == b.pos && a.senses == b.senses;
}

bool operator==(const SenseInventory& a, const SenseInventory& b) { return a.entries_ == b.entries_; }

// ---------------------------------------------------------------------------

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      const json j = json::parse(line);
      CorpusInstance inst;
      inst.id = string_field(j, "id");
      inst.tokens = string_array(j, "tokens");
      if (!j.contains("target_index") || !j.at("target_index").is_number_unsigned()) {
        throw ParseError("field 'target_index' must be a non-negative integer");
      }
      inst.target_index = j.at("target_index").get<std::size_t>();
      inst.lemma = string_field(j, "lemma");
      inst.pos = parse_pos(string_field(j, "pos"));
      if (j.contains("gold") && !j.at("gold").is_null()) inst.gold = string_field(j, "gold");
      inst.validate();
      corpus.push_back(std::move(inst));
    } catch (const json::exception& e) {
      throw ParseError(where(line_no) + e.what());
    } catch (const DataError& e) {
      throw ParseError(where(line_no) + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in);
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream os;
  for (const CorpusInstance& inst : corpus) {
    json j = {{"id", inst.id},
              {"tokens", inst.tokens},
              {"target_index", inst.target_index},
              {"lemma", inst.lemma},
              {"pos", pos_name(inst.pos)}};
    if (inst.gold) j["gold"] = *inst.gold;
    os << j.dump() << '\n';
  }
  write_file_atomic(path, os.str());
}

SenseInventory parse_inventory(std::istream& in) {
  SenseInventory inventory;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    try {
      const json j = json::parse(line);
      std::vector<SenseEntry> senses;
      if (!j.contains("senses") || !j.at("senses").is_array()) {
        throw ParseError("field 'senses' must be an array");
      }
      for (const json& s : j.at("senses")) senses.push_back({string_field(s, "id"), string_array(s, "gloss")});
      inventory.add(string_field(j, "lemma"), parse_pos(string_field(j, "pos")), std::move(senses));
    } catch (const json::exception& e) {
      throw ParseError(where(line_no) + e.what());
    } catch (const DataError& e) {
      throw ParseError(where(line_no) + e.what());
    } catch (const InventoryError& e) {
      throw InventoryError(where(line_no) + e.what());
    }
  }
  return inventory;
}

SenseInventory load_inventory(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_inventory(in);
}

void save_inventory(const std::filesystem::path& path, const SenseInventory& inventory) {
  std::ostringstream os;
  for (const auto& entry : inventory.entries()) {
    json senses = json::array();
    for (const SenseEntry& s : entry.senses) senses.push_back({{"id", s.id}, {"gloss", s.gloss}});
    os << json{{"lemma", entry.lemma}, {"pos", pos_name(entry.pos)}, {"senses", senses}}.dump() << '\n';
  }
  write_file_atomic(path, os.str());
}

// ---------------------------------------------------------------------------

Vocab::Vocab() : words_{"[PAD]", "[UNK]", "[CLS]", "[SEP]"} {
  for (TokenId i = 0; i < words_.size(); ++i) ids_.emplace(words_[i], i);
}

Vocab Vocab::build(const Corpus& corpus, const SenseInventory& inventory, std::size_t min_freq) {
  if (min_freq == 0) throw ConfigError("min_freq must be at least 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const CorpusInstance& inst : corpus)
    for (const std::string& w : inst.tokens) ++counts[w];
  for (const auto& entry : inventory.entries())
    for (const SenseEntry& s : entry.senses)
      for (const std::string& w : s.gloss) ++counts[w];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : counts)
    if (c >= min_freq) kept.emplace_back(w, c);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, c] : kept) words.push_back(w);
  return from_words(std::move(words), min_freq);
}

Vocab Vocab::from_words(std::vector<std::string> words, std::size_t min_freq) {
  Vocab v;
  v.min_freq_ = min_freq;
  for (std::string& w : words) {
    if (v.ids_.contains(w)) throw DataError("vocabulary word '" + w + "' listed twice");
    v.ids_.emplace(w, v.words_.size());
    v.words_.push_back(std::move(w));
  }
  return v;
}

TokenId Vocab::id(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnkId : it->second;
}

std::span<const std::string> Vocab::learned_words() const {
  return std::span<const std::string>(words_).subspan(kFirstWordId);
}

TokenizedSequence tokenize(std::span<const std::string> words, const Vocab& vocab, std::size_t max_len,
                           std::optional<std::size_t> target) {
  if (max_len < 3) throw ContractError("tokenize: max_len must be at least 3");
  if (target && *target >= words.size()) {
    throw IndexError("tokenize: target " + std::to_string(*target) + " out of range for " +
                     std::to_string(words.size()) + " words");
  }
  const std::size_t capacity = max_len - 2;
  std::size_t start = 0;
  std::size_t count = words.size();
  if (count > capacity) {
    if (target) {
      const std::size_t half = capacity / 2;
      start = *target > half ? *target - half : 0;
      start = std::min(start, words.size() - capacity);
    }
    count = capacity;
  }

  TokenizedSequence seq;
  seq.ids.reserve(count + 2);
  seq.ids.push_back(kClsId);
  for (std::size_t i = start; i < start + count; ++i) seq.ids.push_back(vocab.id(words[i]));
  seq.ids.push_back(kSepId);
  if (target) seq.target = *target - start;
  return seq;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<std::string>> load_gold_key(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::map<std::string, std::vector<std::string>> gold;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::istringstream fields(line);
    std::string id, sense;
    fields >> id;
    std::vector<std::string> senses;
    while (fields >> sense) senses.push_back(sense);
    if (senses.empty()) throw ParseError(where(line_no) + "gold line has no sense id");
    if (!gold.emplace(id, std::move(senses)).second) {
      throw ParseError(where(line_no) + "duplicate gold instance id " + id);
    }
  }
  return gold;
}

void save_gold_key(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream os;
  for (const CorpusInstance& inst : corpus) {
    if (inst.gold) os << inst.id << ' ' << *inst.gold << '\n';
  }
  write_file_atomic(path, os.str());
}

std::vector<PredictionLine> load_predictions(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<PredictionLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw ParseError(where(line_no) + "expected instance_id<TAB>sense_id");
    }
    std::string sense = line.substr(tab + 1);
    while (!sense.empty() && (sense.back() == '\r' || sense.back() == ' ')) sense.pop_back();
    out.push_back({line.substr(0, tab), std::move(sense)});
  }
  return out;
}

void save_predictions(const std::filesystem::path& path, std::span<const PredictionLine> predictions) {
  std::ostringstream os;
  for (const PredictionLine& p : predictions) os << p.instance_id << '\t' << p.sense_id << '\n';
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace polywsd
