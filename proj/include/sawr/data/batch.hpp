#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

#include "sawr/data/vocab.hpp"
#include "sawr/depparse/tree.hpp"

namespace sawr::data {

/// One parallel sentence pair as ids. `id` is the position in the corpus
/// and keys the aligned tree / SAWR records.
struct Example {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  std::size_t id = 0;
};

/// Padded mini-batch. src[b] and tgt[b] are padded with PAD to the longest
/// row; targets carry no BOS/EOS.
struct Batch {
  std::vector<std::vector<TokenId>> src;
  std::vector<std::vector<TokenId>> tgt;
  std::vector<std::size_t> src_lengths;
  std::vector<std::size_t> tgt_lengths;
  std::vector<std::size_t> ids;
  /// Optional: source words before id mapping (parser input).
  std::vector<Sentence> src_words;
  /// Optional: source trees, aligned with rows.
  std::vector<depparse::DependencyTree> trees;
  /// Optional: parser encodings [n, dim], aligned with rows.
  std::vector<Eigen::MatrixXd> encodings;

  std::size_t size() const { return src.size(); }
  std::size_t src_width() const { return src.empty() ? 0 : src.front().size(); }
  std::size_t tgt_width() const { return tgt.empty() ? 0 : tgt.front().size(); }
};

inline constexpr std::size_t kNoLimit = std::numeric_limits<std::size_t>::max();

/// Drops pairs whose source or target is longer than the limits (or
/// empty), shuffles the rest with `seed`, stably sorts by source length,
/// cuts consecutive runs of `batch_size` and shuffles the batch order.
/// Throws EmptyDataError when nothing survives filtering.
std::vector<Batch> filter_and_batch(const std::vector<Example>& examples, std::size_t max_src_len,
                                    std::size_t max_tgt_len, std::size_t batch_size, std::uint64_t seed);

/// Batch of the given examples in the given order (no filtering).
Batch make_batch(const std::vector<Example>& examples);

}  // namespace sawr::data
