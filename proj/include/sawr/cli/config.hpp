#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sawr/depparse/parser.hpp"
#include "sawr/seq2seq/model.hpp"
#include "sawr/seq2seq/trainer.hpp"

namespace sawr::cli {

/// Every setting a command can read. Defaults are the full-scale
/// settings where they exist; see `schema()` for the documented list.
struct ExperimentConfig {
  // Model
  std::string mode = "baseline";  // baseline | sawr | sawr-tuned | tree-rnn | tree-linearized
  long embed_dim = 512;
  long hidden_dim = 1024;
  long decoder_dim = 1024;
  long output_hidden_dim = 1024;
  long sawr_dim = 512;
  long tree_hidden_dim = 256;
  double dropout = 0.5;
  double init_range = 0.1;

  // Optimization and decoding
  double learning_rate = 5e-4;
  double clip = 5.0;
  long batch_size = 80;
  long epochs = 10;
  long beam = 5;
  long max_src_len = 50;
  long max_tgt_len = 50;
  long decode_max_len = 150;
  long src_vocab_size = 50000;
  long tgt_vocab_size = 32000;
  long src_bpe_merges = 0;
  long tgt_bpe_merges = 32000;
  long seed = 1;
  bool case_sensitive = false;
  long samples = 1000;
  std::string bin_edges = "10,20,30,40,50";

  // Parser
  long parser_embed_dim = 100;
  long parser_hidden_dim = 200;
  long parser_layers = 3;
  long parser_arc_dim = 500;
  long parser_label_dim = 100;
  long parser_epochs = 30;
  long parser_batch_size = 32;
  double parser_learning_rate = 2e-3;
  long parser_min_freq = 2;
  long parser_train_limit = 0;  // 0: whole treebank

  // Paths
  std::string treebank;
  std::string dev_treebank;
  std::string parser;
  std::string sawr_cache;
  std::string dev_sawr_cache;
  std::string train_src;
  std::string train_tgt;
  std::string train_src_trees;
  std::string dev_src;
  std::string dev_tgt;
  std::string dev_src_trees;
  std::string model;
  std::string models;  // comma-separated, ensemble-translate
  std::string input;
  std::string input_trees;
  std::string hyp;
  std::string hyp_b;
  std::string ref;
  std::string output;
  std::string manifest;

  seq2seq::SyntaxMode syntax_mode() const;
  bool tuned() const { return mode == "sawr-tuned"; }
  seq2seq::ModelConfig model_config() const;
  seq2seq::TrainConfig train_config() const;
  depparse::ParserConfig parser_config() const;
  std::vector<std::size_t> edges() const;
};

struct FieldInfo {
  std::string name;
  std::string type;  // int | real | bool | string | path
  std::string default_value;
  std::string doc;
};

/// Documented schema in declaration order.
const std::vector<FieldInfo>& schema();

/// Parses a "key = value" document ('#' starts a comment). Throws
/// ValidationError on malformed lines or duplicate keys.
std::map<std::string, std::string> parse_document(const std::string& text);

/// Applies `raw` (then `overrides`) on top of the defaults and checks
/// types and cross-field constraints. Unknown keys are rejected with the
/// closest known key as a suggestion.
ExperimentConfig validate_config(const std::map<std::string, std::string>& raw,
                                 const std::map<std::string, std::string>& overrides = {});

/// Checks the fields `command` needs; throws ValidationError naming the
/// first missing one.
void require_for_command(const std::string& command, const ExperimentConfig& config);

/// Effective configuration as "key = value" lines, schema order.
std::string render(const ExperimentConfig& config);
std::map<std::string, std::string> to_map(const ExperimentConfig& config);

/// Closest key within edit distance 3, or "".
std::string suggest_key(const std::string& unknown);

}  // namespace sawr::cli
