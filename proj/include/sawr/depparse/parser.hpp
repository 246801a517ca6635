#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sawr/data/vocab.hpp"
#include "sawr/depparse/eisner.hpp"
#include "sawr/depparse/tree.hpp"
#include "sawr/nn/checkpoint.hpp"
#include "sawr/nn/params.hpp"
#include "sawr/nn/recurrent.hpp"
#include "sawr/tensor/tensor.hpp"

namespace sawr::depparse {

using Tensord = Tensor<double>;

struct ParserConfig {
  Index embed_dim = 100;
  Index hidden_dim = 200;  // per direction; encodings are 2 * hidden_dim wide
  Index layers = 3;
  Index arc_dim = 500;
  Index label_dim = 100;
  double init_range = 0.1;
  std::size_t min_freq = 2;
  std::size_t max_vocab = 50000;
  int epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 2e-3;
  double clip = 5.0;
  std::uint64_t seed = 1;
  bool projectivize = true;  // false: skip non-projective training trees

  Index encoding_dim() const { return 2 * hidden_dim; }
};

/// Parameter names under this prefix form the parser encoder (embeddings
/// and the stacked bidirectional LSTM). SAWRs are read from its top layer.
inline constexpr const char* kParserEncoderPrefix = "parser.encoder.";

/// Stacked bidirectional LSTM encoder bound to parameters in a table.
struct ParserEncoder {
  Tensord embed;
  std::vector<LstmParams<double>> fwd;
  std::vector<LstmParams<double>> bwd;

  static void create(ParamTable<double>& table, Index vocab, const ParserConfig& config, Rng& rng);
  static ParserEncoder bind(const ParamTable<double>& table, Index layers);

  Index output_dim() const { return 2 * fwd.front().hidden_dim(); }

  /// Encodes a batch of id sequences (padded internally). Returns one
  /// [B, output_dim] tensor per position of the longest sequence; rows of
  /// shorter sequences past their length are padding.
  std::vector<Tensord> encode_batch(const std::vector<std::vector<data::TokenId>>& ids) const;
  /// Single sentence: [n, output_dim], row i = o_{i+1}.
  Tensord encode(const std::vector<data::TokenId>& ids) const;
};

/// Stacks rows of sentence `b` from position-major batch states: [n, d].
Tensord sentence_rows(const std::vector<Tensord>& states, Index b, Index n);

/// Biaffine first-order dependency parser over a stacked BiLSTM.
class BiaffineParser {
 public:
  BiaffineParser(ParserConfig config, data::Vocabulary words, std::vector<std::string> labels);

  const ParserConfig& config() const { return config_; }
  const data::Vocabulary& words() const { return words_; }
  const std::vector<std::string>& labels() const { return labels_; }
  ParamTable<double>& params() { return params_; }
  const ParamTable<double>& params() const { return params_; }

  ParserEncoder encoder() const;
  std::vector<data::TokenId> ids(const std::vector<std::string>& tokens) const;

  /// Parser encoding o_1..o_n as an [n, 2*hidden] tensor. Throws
  /// InvalidArgument for an empty sentence.
  Tensord encode(const std::vector<std::string>& tokens) const;

  /// Arc and label scores for an encoding (values only, no tape).
  ArcScores score_arcs(const Tensord& encoding) const;

  /// Summed head-selection and label cross-entropy of `gold` given an
  /// encoding; differentiable with respect to the encoding and the scorer.
  Tensord tree_loss(const Tensord& encoding, const DependencyTree& gold) const;

  /// Mean per-token loss over a batch of sentences.
  Tensord loss(const std::vector<ParsedSentence>& batch) const;

  DependencyTree parse(const std::vector<std::string>& tokens) const;
  std::vector<DependencyTree> parse_all(const std::vector<ParsedSentence>& sentences) const;

  std::string serialize() const;
  static BiaffineParser deserialize(const std::string& bytes);
  void save(const std::string& path) const;
  static BiaffineParser load(const std::string& path);

 private:
  struct ScorerLayers;
  ScorerLayers scorer_forward(const Tensord& encoding) const;

  ParserConfig config_;
  data::Vocabulary words_;
  std::vector<std::string> labels_;
  ParamTable<double> params_;
};

struct ParserEpoch {
  int epoch = 0;
  double loss = 0;
};

/// Trains a parser from scratch on `treebank` with Adam and gradient
/// clipping. Rare words (count < min_freq) map to UNK. Throws
/// InvalidArgument for an empty treebank.
BiaffineParser train_parser(const std::vector<ParsedSentence>& treebank, const ParserConfig& config,
                            const std::function<void(const ParserEpoch&)>& on_epoch = {});

}  // namespace sawr::depparse
