#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polywsd/tokens.hpp"

namespace polywsd {

enum class Pos { Noun, Verb, Adj, Adv };

inline constexpr Pos kAllPos[] = {Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv};

const char* pos_name(Pos pos);
// NOUN / VERB / ADJ / ADV. Throws DataError otherwise.
Pos parse_pos(const std::string& tag);

struct CorpusInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::string lemma;
  Pos pos = Pos::Noun;
  std::optional<std::string> gold;

  // DataError when the target falls outside the tokens or the id is empty.
  void validate() const;
};

using Corpus = std::vector<CorpusInstance>;

struct SenseEntry {
  std::string id;
  std::vector<std::string> gloss;
};

// Candidate senses per (lemma, POS), in first-sense priority order.
class SenseInventory {
 public:
  struct Entry {
    std::string lemma;
    Pos pos;
    std::vector<SenseEntry> senses;
  };

  // InventoryError on a duplicate key, duplicate sense id, empty gloss or no
  // senses.
  void add(std::string lemma, Pos pos, std::vector<SenseEntry> senses);

  const std::vector<SenseEntry>* find(const std::string& lemma, Pos pos) const;
  // InventoryError naming the key when absent.
  const std::vector<SenseEntry>& candidates(const std::string& lemma, Pos pos) const;
  // Position of `sense_id` within the candidates, if present.
  std::optional<std::size_t> index_of(const std::string& lemma, Pos pos, const std::string& sense_id) const;

  // Entries in insertion order.
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const SenseInventory& a, const SenseInventory& b);

 private:
  std::vector<Entry> entries_;
  std::map<std::pair<std::string, Pos>, std::size_t> index_;
};

bool operator==(const SenseEntry& a, const SenseEntry& b);
bool operator==(const SenseInventory::Entry& a, const SenseInventory::Entry& b);

// One JSON object per line: {"id", "tokens", "target_index", "lemma", "pos",
// "gold"?}. Blank lines are skipped. Errors carry the 1-based line number.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// One JSON object per line: {"lemma", "pos", "senses": [{"id", "gloss"}]}.
SenseInventory parse_inventory(std::istream& in);
SenseInventory load_inventory(const std::filesystem::path& path);
void save_inventory(const std::filesystem::path& path, const SenseInventory& inventory);

// Token -> id map. Ids 0..3 are reserved for [PAD] [UNK] [CLS] [SEP].
class Vocab {
 public:
  Vocab();

  // Counts every corpus token and every gloss token; words with count >=
  // min_freq get ids from 4 upward in descending count, then lexicographic
  // order.
  static Vocab build(const Corpus& corpus, const SenseInventory& inventory, std::size_t min_freq);
  // Rebuilds from the words for ids 4, 5, ... in order.
  static Vocab from_words(std::vector<std::string> words, std::size_t min_freq);

  // kUnkId for unknown words.
  TokenId id(const std::string& word) const;
  bool contains(const std::string& word) const { return ids_.contains(word); }
  const std::string& word(TokenId id) const { return words_.at(id); }
  std::size_t size() const { return words_.size(); }
  std::size_t min_freq() const { return min_freq_; }
  // Non-reserved words, in id order.
  std::span<const std::string> learned_words() const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.words_ == b.words_ && a.min_freq_ == b.min_freq_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t min_freq_ = 1;
};

// [CLS] + ids + [SEP], at most max_len ids. When `target` is given and the
// words do not fit, a window centred on the target is kept and the target's
// position inside the window is reported; otherwise the tail is cut.
// max_len < 3 is a ContractError; target >= words.size() an IndexError.
TokenizedSequence tokenize(std::span<const std::string> words, const Vocab& vocab, std::size_t max_len,
                           std::optional<std::size_t> target = std::nullopt);

// "instance_id sense_id [sense_id ...]" per line.
std::map<std::string, std::vector<std::string>> load_gold_key(const std::filesystem::path& path);
void save_gold_key(const std::filesystem::path& path, const Corpus& corpus);

struct PredictionLine {
  std::string instance_id;
  std::string sense_id;
};

// "instance_id<TAB>sense_id" per line.
std::vector<PredictionLine> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, std::span<const PredictionLine> predictions);

// Writes `contents` to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace polywsd
