#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sawr/data/vocab.hpp"

namespace sawr::data {

/// Ordered merge list. Words are split into UTF-8 code points; there is no
/// end-of-word symbol. Segmented output marks every unit except the last
/// one of a word with the suffix "@@".
class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  BpeModel() = default;
  explicit BpeModel(std::vector<Merge> merges);

  const std::vector<Merge>& merges() const { return merges_; }

  /// Units of one word, without markers.
  std::vector<std::string> segment_word(const std::string& word) const;
  /// Segments every word; non-final units carry the "@@" marker.
  Sentence apply(const Sentence& words) const;

  /// One merge per line: "<left> <right>".
  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static BpeModel load(std::istream& in);
  static BpeModel load(const std::string& path);

 private:
  std::vector<Merge> merges_;
  std::map<Merge, std::size_t> rank_;
};

inline constexpr const char* kBpeMarker = "@@";

/// Splits a UTF-8 string into code points (invalid bytes become singletons).
std::vector<std::string> utf8_chars(const std::string& word);

/// Greedy BPE: each step merges the most frequent adjacent pair, ties
/// broken by the lexicographically smallest (left, right). Stops after
/// `num_merges` merges or when no pair occurs at least twice.
BpeModel learn_bpe(const std::map<std::string, long>& word_counts, std::size_t num_merges);

/// Word frequencies of a tokenized corpus.
std::map<std::string, long> word_counts(const std::vector<Sentence>& corpus);

/// Inverse of BpeModel::apply: joins units ending in "@@" with their successor.
Sentence decode_bpe(const Sentence& units);

}  // namespace sawr::data
