#include "sawr/cli/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <variant>

#include "sawr/errors.hpp"

namespace sawr::cli {

namespace {

using Member = std::variant<long ExperimentConfig::*, double ExperimentConfig::*, bool ExperimentConfig::*,
                            std::string ExperimentConfig::*>;

struct Field {
  const char* name;
  Member member;
  const char* doc;
  bool is_path = false;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table{
      {"mode", &C::mode, "baseline | sawr | sawr-tuned | tree-rnn | tree-linearized"},
      {"embed_dim", &C::embed_dim, "source/target word embedding size"},
      {"hidden_dim", &C::hidden_dim, "encoder state size (two directions of hidden_dim/2)"},
      {"decoder_dim", &C::decoder_dim, "decoder GRU state size"},
      {"output_hidden_dim", &C::output_hidden_dim, "hidden layer of the output network"},
      {"sawr_dim", &C::sawr_dim, "SAWR projection size"},
      {"tree_hidden_dim", &C::tree_hidden_dim, "Tree-GRU state size per direction"},
      {"dropout", &C::dropout, "dropout ratio before the output layer"},
      {"init_range", &C::init_range, "uniform initialization range"},
      {"learning_rate", &C::learning_rate, "Adam learning rate"},
      {"clip", &C::clip, "global gradient-norm clipping threshold"},
      {"batch_size", &C::batch_size, "sentence pairs per mini-batch"},
      {"epochs", &C::epochs, "NMT training epochs"},
      {"beam", &C::beam, "beam size for translation"},
      {"max_src_len", &C::max_src_len, "longest training source sentence, in words"},
      {"max_tgt_len", &C::max_tgt_len, "longest training target sentence, in words"},
      {"decode_max_len", &C::decode_max_len, "longest translation, in target units"},
      {"src_vocab_size", &C::src_vocab_size, "source vocabulary size (reserved symbols included)"},
      {"tgt_vocab_size", &C::tgt_vocab_size, "target vocabulary size (reserved symbols included)"},
      {"src_bpe_merges", &C::src_bpe_merges, "source BPE merges (baseline mode only; 0 disables)"},
      {"tgt_bpe_merges", &C::tgt_bpe_merges, "target BPE merges (0 disables)"},
      {"seed", &C::seed, "seed for initialization, shuffling, dropout and bootstrap"},
      {"case_sensitive", &C::case_sensitive, "case-sensitive BLEU"},
      {"samples", &C::samples, "bootstrap resamples"},
      {"bin_edges", &C::bin_edges, "ascending source-length bin edges for length-report"},
      {"parser_embed_dim", &C::parser_embed_dim, "parser word embedding size"},
      {"parser_hidden_dim", &C::parser_hidden_dim, "parser LSTM size per direction"},
      {"parser_layers", &C::parser_layers, "parser BiLSTM layers"},
      {"parser_arc_dim", &C::parser_arc_dim, "biaffine arc MLP size"},
      {"parser_label_dim", &C::parser_label_dim, "biaffine label MLP size"},
      {"parser_epochs", &C::parser_epochs, "parser training epochs"},
      {"parser_batch_size", &C::parser_batch_size, "parser sentences per mini-batch"},
      {"parser_learning_rate", &C::parser_learning_rate, "parser Adam learning rate"},
      {"parser_min_freq", &C::parser_min_freq, "minimum count for a parser vocabulary word"},
      {"parser_train_limit", &C::parser_train_limit, "use only the first N treebank sentences (0: all)"},
      {"treebank", &C::treebank, "parser training treebank (CoNLL)", true},
      {"dev_treebank", &C::dev_treebank, "parser development treebank", true},
      {"parser", &C::parser, "parser checkpoint", true},
      {"sawr_cache", &C::sawr_cache, "SAWR cache for train_src", true},
      {"dev_sawr_cache", &C::dev_sawr_cache, "SAWR cache for dev_src", true},
      {"train_src", &C::train_src, "training source text, one sentence per line", true},
      {"train_tgt", &C::train_tgt, "training target text", true},
      {"train_src_trees", &C::train_src_trees, "CoNLL trees of train_src (else parsed with `parser`)", true},
      {"dev_src", &C::dev_src, "development source text", true},
      {"dev_tgt", &C::dev_tgt, "development target text", true},
      {"dev_src_trees", &C::dev_src_trees, "CoNLL trees of dev_src", true},
      {"model", &C::model, "NMT checkpoint (written by train-nmt, read by the decoders)", true},
      {"models", &C::models, "comma-separated NMT checkpoints for ensemble-translate", true},
      {"input", &C::input, "source text to translate / analyse", true},
      {"input_trees", &C::input_trees, "CoNLL trees of input", true},
      {"hyp", &C::hyp, "system output", true},
      {"hyp_b", &C::hyp_b, "second system output (significance)", true},
      {"ref", &C::ref, "reference translation", true},
      {"output", &C::output, "output file of the command", true},
      {"manifest", &C::manifest, "run manifest (JSON lines); default <primary output>.manifest.jsonl", true},
  };
  return table;
}

std::string type_name(const Field& f) {
  if (f.is_path) return "path";
  switch (f.member.index()) {
    case 0:
      return "int";
    case 1:
      return "real";
    case 2:
      return "bool";
    default:
      return "string";
  }
}

std::string format_value(const ExperimentConfig& c, const Field& f) {
  return std::visit(
      [&](auto member) -> std::string {
        const auto& v = c.*member;
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, double>) {
          std::ostringstream os;
          os << v;
          return os.str();
        } else {
          return std::to_string(v);
        }
      },
      f.member);
}

void assign(ExperimentConfig& c, const Field& f, const std::string& text) {
  std::visit(
      [&](auto member) {
        auto& slot = c.*member;
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (text == "true" || text == "1" || text == "yes") {
            slot = true;
          } else if (text == "false" || text == "0" || text == "no") {
            slot = false;
          } else {
            throw ValidationError(f.name, "expected a boolean, got '" + text + "'");
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          slot = text;
        } else if constexpr (std::is_same_v<T, double>) {
          char* end = nullptr;
          errno = 0;
          const double v = std::strtod(text.c_str(), &end);
          if (text.empty() || *end != '\0' || errno) {
            throw ValidationError(f.name, "expected a real number, got '" + text + "'");
          }
          slot = v;
        } else {
          char* end = nullptr;
          errno = 0;
          const long v = std::strtol(text.c_str(), &end, 10);
          if (text.empty() || *end != '\0' || errno) {
            throw ValidationError(f.name, "expected an integer, got '" + text + "'");
          }
          slot = v;
        }
      },
      f.member);
}

const Field* find_field(const std::string& name) {
  for (const auto& f : fields()) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void check_positive(long v, const char* name) {
  if (v <= 0) throw ValidationError(name, "must be positive, got " + std::to_string(v));
}

}  // namespace

seq2seq::SyntaxMode ExperimentConfig::syntax_mode() const {
  return seq2seq::parse_syntax_mode(mode == "sawr-tuned" ? "sawr" : mode);
}

seq2seq::ModelConfig ExperimentConfig::model_config() const {
  seq2seq::ModelConfig m;
  m.mode = syntax_mode();
  m.embed_dim = embed_dim;
  m.hidden_dim = hidden_dim;
  m.decoder_dim = decoder_dim;
  m.output_hidden_dim = output_hidden_dim;
  m.sawr_dim = sawr_dim;
  m.tree_hidden_dim = tree_hidden_dim;
  m.dropout = dropout;
  m.init_range = init_range;
  m.seed = static_cast<std::uint64_t>(seed);
  return m;
}

seq2seq::TrainConfig ExperimentConfig::train_config() const {
  return seq2seq::TrainConfig{learning_rate, clip, static_cast<int>(epochs)};
}

depparse::ParserConfig ExperimentConfig::parser_config() const {
  depparse::ParserConfig p;
  p.embed_dim = parser_embed_dim;
  p.hidden_dim = parser_hidden_dim;
  p.layers = parser_layers;
  p.arc_dim = parser_arc_dim;
  p.label_dim = parser_label_dim;
  p.epochs = static_cast<int>(parser_epochs);
  p.batch_size = static_cast<std::size_t>(parser_batch_size);
  p.learning_rate = parser_learning_rate;
  p.min_freq = static_cast<std::size_t>(parser_min_freq);
  p.init_range = init_range;
  p.clip = clip;
  p.seed = static_cast<std::uint64_t>(seed);
  return p;
}

std::vector<std::size_t> ExperimentConfig::edges() const {
  std::vector<std::size_t> out;
  std::stringstream in(bin_edges);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (*end != '\0' || v <= 0) throw ValidationError("bin_edges", "expected positive integers, got '" + item + "'");
    if (!out.empty() && static_cast<std::size_t>(v) <= out.back()) {
      throw ValidationError("bin_edges", "edges must be strictly ascending");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

const std::vector<FieldInfo>& schema() {
  static const std::vector<FieldInfo> info = [] {
    std::vector<FieldInfo> out;
    ExperimentConfig defaults;
    for (const auto& f : fields()) out.push_back({f.name, type_name(f), format_value(defaults, f), f.doc});
    return out;
  }();
  return info;
}

std::map<std::string, std::string> parse_document(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(number), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("line " + std::to_string(number), "missing key");
    if (!out.emplace(key, trim(line.substr(eq + 1))).second) throw ValidationError(key, "set twice");
  }
  return out;
}

std::string suggest_key(const std::string& unknown) {
  std::string best;
  std::size_t best_d = 4;
  for (const auto& f : fields()) {
    const std::size_t d = edit_distance(unknown, f.name);
    if (d < best_d) {
      best_d = d;
      best = f.name;
    }
  }
  return best;
}

ExperimentConfig validate_config(const std::map<std::string, std::string>& raw,
                                 const std::map<std::string, std::string>& overrides) {
  ExperimentConfig c;
  for (const auto* layer : {&raw, &overrides}) {
    for (const auto& [key, value] : *layer) {
      const Field* f = find_field(key);
      if (!f) {
        const std::string hint = suggest_key(key);
        throw ValidationError(key, "unknown key" + (hint.empty() ? std::string() : " (did you mean '" + hint + "'?)"));
      }
      assign(c, *f, value);
    }
  }

  static const std::vector<std::string> modes{"baseline", "sawr", "sawr-tuned", "tree-rnn", "tree-linearized"};
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) {
    throw ValidationError("mode", "unknown mode '" + c.mode + "'");
  }
  check_positive(c.embed_dim, "embed_dim");
  check_positive(c.hidden_dim, "hidden_dim");
  if (c.hidden_dim % 2) {
    throw ValidationError("hidden_dim", "must be even: the two encoder directions each take hidden_dim/2");
  }
  check_positive(c.decoder_dim, "decoder_dim");
  check_positive(c.output_hidden_dim, "output_hidden_dim");
  check_positive(c.sawr_dim, "sawr_dim");
  check_positive(c.tree_hidden_dim, "tree_hidden_dim");
  if (!(c.dropout >= 0 && c.dropout < 1)) throw ValidationError("dropout", "must lie in [0, 1)");
  if (!(c.init_range > 0)) throw ValidationError("init_range", "must be positive");
  if (!(c.learning_rate > 0)) throw ValidationError("learning_rate", "must be positive");
  if (!(c.clip > 0)) throw ValidationError("clip", "must be positive");
  check_positive(c.batch_size, "batch_size");
  if (c.epochs < 0) throw ValidationError("epochs", "must not be negative");
  check_positive(c.beam, "beam");
  check_positive(c.max_src_len, "max_src_len");
  check_positive(c.max_tgt_len, "max_tgt_len");
  check_positive(c.decode_max_len, "decode_max_len");
  if (c.src_vocab_size <= 4) throw ValidationError("src_vocab_size", "must exceed the 4 reserved symbols");
  if (c.tgt_vocab_size <= 4) throw ValidationError("tgt_vocab_size", "must exceed the 4 reserved symbols");
  if (c.src_bpe_merges < 0) throw ValidationError("src_bpe_merges", "must not be negative");
  if (c.tgt_bpe_merges < 0) throw ValidationError("tgt_bpe_merges", "must not be negative");
  if (c.src_bpe_merges > 0 && c.mode != "baseline") {
    throw ValidationError("src_bpe_merges", "source BPE would break word/tree alignment; only baseline mode allows it");
  }
  if (c.seed < 0) throw ValidationError("seed", "must not be negative");
  if (c.samples < 100) throw ValidationError("samples", "need at least 100 bootstrap samples");
  c.edges();
  check_positive(c.parser_embed_dim, "parser_embed_dim");
  check_positive(c.parser_hidden_dim, "parser_hidden_dim");
  check_positive(c.parser_layers, "parser_layers");
  check_positive(c.parser_arc_dim, "parser_arc_dim");
  check_positive(c.parser_label_dim, "parser_label_dim");
  if (c.parser_epochs < 0) throw ValidationError("parser_epochs", "must not be negative");
  check_positive(c.parser_batch_size, "parser_batch_size");
  if (!(c.parser_learning_rate > 0)) throw ValidationError("parser_learning_rate", "must be positive");
  check_positive(c.parser_min_freq, "parser_min_freq");
  if (c.parser_train_limit < 0) throw ValidationError("parser_train_limit", "must not be negative");
  return c;
}

void require_for_command(const std::string& command, const ExperimentConfig& c) {
  auto need = [](const std::string& value, const char* name, const std::string& why) {
    if (value.empty()) throw ValidationError(name, "required " + why);
  };
  const bool tree_mode = c.mode == "tree-rnn" || c.mode == "tree-linearized";
  const bool sawr_mode = c.mode == "sawr" || c.mode == "sawr-tuned";
  if (command == "train-parser") {
    need(c.treebank, "treebank", "by train-parser");
    need(c.output, "output", "by train-parser (parser checkpoint to write)");
  } else if (command == "extract-sawr") {
    need(c.parser, "parser", "by extract-sawr");
    need(c.input, "input", "by extract-sawr (source sentences)");
    need(c.output, "output", "by extract-sawr (cache to write)");
  } else if (command == "train-nmt") {
    need(c.train_src, "train_src", "by train-nmt");
    need(c.train_tgt, "train_tgt", "by train-nmt");
    need(c.model, "model", "by train-nmt (checkpoint to write)");
    if (c.dev_src.empty() != c.dev_tgt.empty()) {
      need(c.dev_src, "dev_src", "when dev_tgt is set");
      need(c.dev_tgt, "dev_tgt", "when dev_src is set");
    }
    if (sawr_mode) need(c.parser, "parser", "in " + c.mode + " mode");
    if (tree_mode && c.train_src_trees.empty()) {
      need(c.parser, "parser", "in " + c.mode + " mode when train_src_trees is not given");
    }
    if (tree_mode && !c.dev_src.empty() && c.dev_src_trees.empty()) {
      need(c.parser, "parser", "in " + c.mode + " mode when dev_src_trees is not given");
    }
  } else if (command == "translate" || command == "align-dump") {
    need(c.model, "model", "by " + command);
    need(c.input, "input", "by " + command);
    need(c.output, "output", "by " + command);
  } else if (command == "ensemble-translate") {
    need(c.models, "models", "by ensemble-translate");
    need(c.input, "input", "by ensemble-translate");
    need(c.output, "output", "by ensemble-translate");
  } else if (command == "evaluate") {
    need(c.hyp, "hyp", "by evaluate");
    need(c.ref, "ref", "by evaluate");
  } else if (command == "significance") {
    need(c.hyp, "hyp", "by significance");
    need(c.hyp_b, "hyp_b", "by significance");
    need(c.ref, "ref", "by significance");
  } else if (command == "length-report") {
    need(c.hyp, "hyp", "by length-report");
    need(c.ref, "ref", "by length-report");
    need(c.input, "input", "by length-report (source sentences)");
    need(c.output, "output", "by length-report");
  } else if (command != "show-config") {
    throw ValidationError("command", "unknown command '" + command + "'");
  }
}

std::map<std::string, std::string> to_map(const ExperimentConfig& config) {
  std::map<std::string, std::string> out;
  for (const auto& f : fields()) out[f.name] = format_value(config, f);
  return out;
}

std::string render(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.name << " = " << format_value(config, f) << '\n';
  return os.str();
}

}  // namespace sawr::cli
