#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "sawr/data/batch.hpp"
#include "sawr/data/vocab.hpp"
#include "sawr/depparse/parser.hpp"
#include "sawr/nn/checkpoint.hpp"
#include "sawr/nn/layers.hpp"
#include "sawr/nn/params.hpp"
#include "sawr/tensor/tensor.hpp"

namespace sawr::seq2seq {

using Tensord = Tensor<double>;
using data::TokenId;

/// How source syntax enters the encoder.
///   none             word embeddings only
///   sawr             embeddings (+) projected parser encodings
///   tree_rnn         bidirectional Tree-GRU outputs over embeddings
///   tree_linearized  bracketed tree symbols as the source sequence
enum class SyntaxMode { none, sawr, tree_rnn, tree_linearized };

std::string to_string(SyntaxMode mode);
/// Accepts "baseline"/"none", "sawr", "tree-rnn", "tree-linearized".
SyntaxMode parse_syntax_mode(const std::string& name);

struct ModelConfig {
  SyntaxMode mode = SyntaxMode::none;
  Index embed_dim = 512;
  Index hidden_dim = 1024;  // encoder output; each direction has hidden_dim / 2
  Index decoder_dim = 1024;
  Index output_hidden_dim = 1024;
  Index sawr_dim = 512;
  Index tree_hidden_dim = 256;  // per direction
  double dropout = 0.5;
  double init_range = 0.1;
  std::uint64_t seed = 1;
};

/// Attention over position-major encoder states.
struct Attention {
  Tensord context;  // [B, H]
  Tensord weights;  // [B, T], rows sum to 1
};

/// beta(b,t) = s_b Wa h_{t,b} + mask(b,t); alpha = softmax over t;
/// c_b = sum_t alpha(b,t) h_{t,b}. keys is [T*B, H] with row t*B+b; mask
/// is empty or [B,T] with 0 for real positions and a large negative value
/// for padding.
Attention attend(const Tensord& s_prev, const Tensord& keys, const Eigen::MatrixXd& mask, const Tensord& Wa);

struct EncoderOutput {
  Tensord keys;  // [T*B, H]
  Eigen::MatrixXd mask;
  std::vector<Index> lengths;
  Tensord backward_final;  // [B, H/2]

  Index batch() const { return static_cast<Index>(lengths.size()); }
  Index steps() const { return keys.rows() / batch(); }
  /// Values-only copy of a one-sentence encoding with k identical rows.
  EncoderOutput repeat(Index k) const;
};

struct DecoderState {
  Tensord s;  // [B, decoder_dim]
  Tensord c;  // [B, H]
};

struct StepOutput {
  Tensord logits;  // [B, V]
  DecoderState state;
  Tensord attention;  // [B, T]
};

/// A source sentence with whatever its syntax mode needs: a tree for
/// tree_rnn, optionally a cached parser encoding for sawr.
struct SourceSentence {
  data::Sentence words;
  std::optional<depparse::DependencyTree> tree;
  std::optional<Eigen::MatrixXd> encoding;
};

/// Attentional GRU encoder-decoder.
///
/// Decoder step j, given y_{j-1}, c_{j-1}, s_{j-2}:
///   s_{j-1} = GRU(e(y_{j-1}) (+) c_{j-1}, s_{j-2})
///   c_j, alpha_j = attend(s_{j-1})
///   p(y_j) = softmax(W2 dropout(tanh(W1 [s_{j-1} (+) c_j] + b1)) + b2)
/// with s_0 = tanh(linear(backward encoder state at position 1)), c_0 = 0
/// and y_0 = BOS.
class TranslationModel {
 public:
  TranslationModel(ModelConfig config, data::Vocabulary src, data::Vocabulary tgt,
                   const depparse::BiaffineParser* parser = nullptr);

  const ModelConfig& config() const { return config_; }
  SyntaxMode mode() const { return config_.mode; }
  const data::Vocabulary& src_vocab() const { return src_; }
  const data::Vocabulary& tgt_vocab() const { return tgt_; }
  const data::Vocabulary& parser_words() const { return parser_words_; }
  ParamTable<double>& params() { return params_; }
  const ParamTable<double>& params() const { return params_; }
  Index encoder_input_dim() const;

  bool parser_trainable() const { return parser_trainable_; }
  /// Names excluded from optimizer updates (frozen parser encoder).
  std::unordered_set<std::string> frozen_names() const;
  std::vector<std::string> parser_param_names() const;

  /// String annotations stored with the checkpoint; keys start with "note.".
  Metadata& notes() { return notes_; }
  const Metadata& notes() const { return notes_; }

  data::Batch source_batch(const std::vector<SourceSentence>& sources) const;
  /// Source/target pairs in the given order, ready for batch_loss.
  data::Batch training_batch(const std::vector<SourceSentence>& sources,
                             const std::vector<data::Sentence>& targets) const;

  /// One [B, encoder_input_dim] tensor per source position.
  std::vector<Tensord> encoder_inputs(const data::Batch& batch) const;
  EncoderOutput encode(const data::Batch& batch) const;
  DecoderState initial_state(const EncoderOutput& enc) const;
  StepOutput decode_step(const std::vector<TokenId>& y_prev, const DecoderState& state, const EncoderOutput& enc,
                         Mode mode = Mode::eval, Rng* rng = nullptr) const;

  /// Teacher-forced mean negative log-likelihood per target token
  /// (including the final EOS); padding positions carry zero weight.
  Tensord batch_loss(const data::Batch& batch, Mode mode, Rng& rng) const;
  /// Summed log-probability of `tokens` followed by EOS (eval mode).
  double sequence_log_prob(const data::Batch& single_source, const std::vector<TokenId>& tokens) const;

  std::string serialize() const;
  static TranslationModel deserialize(const std::string& bytes);
  void save(const std::string& path) const;
  static TranslationModel load(const std::string& path);

 private:
  friend void set_parser_trainable(TranslationModel& model, bool trainable);

  ModelConfig config_;
  data::Vocabulary src_;
  data::Vocabulary tgt_;
  data::Vocabulary parser_words_;
  Index parser_layers_ = 0;
  Index parser_dim_ = 0;
  bool parser_trainable_ = false;
  ParamTable<double> params_;
  Metadata notes_;
};

/// Source in the form `mode` consumes: linearized symbols for
/// tree_linearized, words plus tree for tree_rnn, words (and an optional
/// cached encoding) otherwise. Throws InvalidArgument when a needed tree is
/// missing.
SourceSentence prepare_source(SyntaxMode mode, const data::Sentence& words,
                              const std::optional<depparse::DependencyTree>& tree = std::nullopt,
                              const std::optional<Eigen::MatrixXd>& encoding = std::nullopt);

/// Fills src_words, trees and encodings of `batch` from `corpus`, indexed
/// by batch.ids. Trees and encodings are attached only when every row has one.
void attach_sources(data::Batch& batch, const std::vector<SourceSentence>& corpus);

/// Switches between frozen SAWRs (parser encoder excluded from updates and
/// from the tape) and fine-tuning through the parser encoder. Throws
/// InvalidState unless the model is in sawr mode.
void set_parser_trainable(TranslationModel& model, bool trainable);

}  // namespace sawr::seq2seq
