#pragma once

#include <Eigen/Dense>

#include <memory>
#include <vector>

#include "sawr/seq2seq/model.hpp"

namespace sawr::seq2seq {

/// A (partial) translation. tokens includes the final EOS when finished;
/// log_prob is the sum of the chosen per-step log-probabilities and
/// attention holds one alpha row per emitted token.
struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0;
  std::vector<Eigen::RowVectorXd> attention;
  bool finished = false;

  /// Tokens without the trailing EOS.
  std::vector<TokenId> output() const;
};

struct StepResult {
  Eigen::MatrixXd probs;      // [R, V]
  Eigen::MatrixXd attention;  // [R, T]
};

/// Incremental decoder for one source sentence. Each call to advance()
/// defines R new rows: row r extends previous row parents[r] with token
/// prev[r]. The first call continues from the single initial state.
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual Index vocab_size() const = 0;
  virtual StepResult advance(const std::vector<Index>& parents, const std::vector<TokenId>& prev) = 0;
};

/// Session over a translation model; `source` must hold one sentence.
std::unique_ptr<DecodeSession> open_session(const TranslationModel& model, const data::Batch& source);

/// Argmax at every step (lowest id on ties) until EOS or max_len tokens.
Hypothesis greedy_decode(DecodeSession& session, std::size_t max_len);

/// Beam search over raw log-probability sums, no length normalization.
///
/// With several sessions the next-token distributions are averaged
/// (arithmetic mean of probabilities) before scoring. Each step keeps the
/// best (beam_size - finished) extensions, ranked by score, then parent
/// row, then token id; extensions ending in EOS move to the finished pool.
/// Returns the best finished hypothesis, or the best unfinished one if
/// nothing finished within max_len tokens (EOS included). Attention rows
/// come from the first session.
Hypothesis beam_search(const std::vector<DecodeSession*>& sessions, std::size_t beam_size, std::size_t max_len);

Hypothesis beam_search(const TranslationModel& model, const SourceSentence& source, std::size_t beam_size,
                       std::size_t max_len);
Hypothesis greedy_decode(const TranslationModel& model, const SourceSentence& source, std::size_t max_len);

}  // namespace sawr::seq2seq
