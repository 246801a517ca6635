#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace sawr::data {

using TokenId = std::int64_t;
using Sentence = std::vector<std::string>;

/// Token <-> id map with four reserved entries:
/// 0 "<pad>", 1 "<unk>", 2 "<s>", 3 "</s>".
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr TokenId kReserved = 4;

  Vocabulary();

  /// Adds `token` if absent and returns its id.
  TokenId add(const std::string& token);

  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  /// UNK for unknown tokens.
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const Sentence& sentence) const;
  /// Stops at the first EOS; PAD and BOS are dropped.
  Sentence decode(const std::vector<TokenId>& ids) const;

  /// One non-reserved token per line; line k holds id k + 4.
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static Vocabulary load(std::istream& in);
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Keeps the max_size - 4 most frequent tokens that occur at least
/// `min_count` times. Frequency ties are broken by first occurrence.
/// Throws InvalidArgument for an empty corpus or max_size <= 4.
Vocabulary build_vocab(const std::vector<Sentence>& corpus, std::size_t max_size, std::size_t min_count = 1);

}  // namespace sawr::data
