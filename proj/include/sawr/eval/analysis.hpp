#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sawr/eval/bleu.hpp"
#include "sawr/seq2seq/beam.hpp"

namespace sawr::eval {

/// Sentences whose source length n satisfies lo <= n < hi (hi absent for
/// the last bin). A length equal to an edge falls in the upper bin.
struct LengthBin {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;
  std::size_t sentences = 0;
  std::optional<BleuReport> report;  // empty when the bin has no sentences
};

/// Corpus BLEU within source-length bins; edges.size() + 1 bins. Throws
/// InvalidArgument when edges are not strictly ascending or lists differ
/// in length.
std::vector<LengthBin> bleu_by_length(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                                      const std::vector<Sentence>& sources, const std::vector<std::size_t>& edges,
                                      bool case_sensitive = false);

/// Attention of one greedy translation: attn[j] is alpha over the source
/// symbols for emitted target token j (EOS included when produced).
struct AlignmentRecord {
  std::size_t id = 0;
  Sentence src;
  Sentence tgt;
  std::vector<Eigen::RowVectorXd> attn;
};

/// Greedy-decodes every source and records its attention rows. Empty
/// sources are skipped with a warning on `log`.
std::vector<AlignmentRecord> dump_alignments(const seq2seq::TranslationModel& model,
                                             const std::vector<seq2seq::SourceSentence>& sources, std::size_t max_len,
                                             std::ostream& log);

/// {"id":..,"src":[..],"tgt":[..],"attn":[[..],..]} on one line.
std::string to_json_line(const AlignmentRecord& record);

/// Beam search over the arithmetic mean of the models' next-token
/// distributions. sources[k] is the source prepared for models[k]'s own
/// syntax mode. Throws InvalidArgument when target vocabularies differ.
seq2seq::Hypothesis ensemble_decode(const std::vector<const seq2seq::TranslationModel*>& models,
                                    const std::vector<seq2seq::SourceSentence>& sources, std::size_t beam_size,
                                    std::size_t max_len);

}  // namespace sawr::eval
