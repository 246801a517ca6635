#include "sawr/data/batch.hpp"

#include <algorithm>

#include "sawr/errors.hpp"
#include "sawr/random.hpp"

namespace sawr::data {

Batch make_batch(const std::vector<Example>& examples) {
  Batch b;
  std::size_t src_width = 0;
  std::size_t tgt_width = 0;
  for (const auto& e : examples) {
    src_width = std::max(src_width, e.src.size());
    tgt_width = std::max(tgt_width, e.tgt.size());
  }
  for (const auto& e : examples) {
    auto s = e.src;
    s.resize(src_width, Vocabulary::kPad);
    auto t = e.tgt;
    t.resize(tgt_width, Vocabulary::kPad);
    b.src.push_back(std::move(s));
    b.tgt.push_back(std::move(t));
    b.src_lengths.push_back(e.src.size());
    b.tgt_lengths.push_back(e.tgt.size());
    b.ids.push_back(e.id);
  }
  return b;
}

std::vector<Batch> filter_and_batch(const std::vector<Example>& examples, std::size_t max_src_len,
                                    std::size_t max_tgt_len, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw InvalidArgument("filter_and_batch: batch_size must be positive");
  std::vector<const Example*> kept;
  for (const auto& e : examples) {
    if (e.src.empty() || e.tgt.empty()) continue;
    if (e.src.size() > max_src_len || e.tgt.size() > max_tgt_len) continue;
    kept.push_back(&e);
  }
  if (kept.empty()) throw EmptyDataError("filter_and_batch: every pair was filtered out");
  Rng rng(seed);
  rng.shuffle(kept);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Example* a, const Example* b) { return a->src.size() < b->src.size(); });
  std::vector<Batch> batches;
  for (std::size_t start = 0; start < kept.size(); start += batch_size) {
    std::vector<Example> chunk;
    for (std::size_t i = start; i < std::min(kept.size(), start + batch_size); ++i) chunk.push_back(*kept[i]);
    batches.push_back(make_batch(chunk));
  }
  rng.shuffle(batches);
  return batches;
}

}  // namespace sawr::data
