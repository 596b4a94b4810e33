#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace polywsd {

using TokenId = std::size_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kClsId = 2;
inline constexpr TokenId kSepId = 3;
inline constexpr TokenId kFirstWordId = 4;

// [CLS] w_1 ... w_n [SEP] plus the word-level target position, if any.
struct TokenizedSequence {
  std::vector<TokenId> ids;
  std::optional<std::size_t> target;

  std::size_t word_count() const { return ids.size() >= 2 ? ids.size() - 2 : 0; }
  std::span<const TokenId> words() const {
    return std::span<const TokenId>(ids).subspan(1, word_count());
  }
};

}  // namespace polywsd
