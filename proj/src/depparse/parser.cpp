#include "sawr/depparse/parser.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "sawr/hash.hpp"
#include "sawr/nn/layers.hpp"
#include "sawr/nn/optim.hpp"
#include "sawr/tensor/ops.hpp"

namespace sawr::depparse {

namespace {

constexpr double kMaskValue = -1e9;

std::string layer_prefix(Index k, const char* dir) {
  return std::string(kParserEncoderPrefix) + "l" + std::to_string(k) + "." + dir;
}

Metadata config_meta(const ParserConfig& c) {
  return {{"parser.embed_dim", std::to_string(c.embed_dim)},
          {"parser.hidden_dim", std::to_string(c.hidden_dim)},
          {"parser.layers", std::to_string(c.layers)},
          {"parser.arc_dim", std::to_string(c.arc_dim)},
          {"parser.label_dim", std::to_string(c.label_dim)}};
}

Index meta_index(const Metadata& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("parser checkpoint lacks " + key);
  return static_cast<Index>(std::stoll(it->second));
}

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + '\n';
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

void ParserEncoder::create(ParamTable<double>& table, Index vocab, const ParserConfig& config, Rng& rng) {
  if (config.layers < 1) throw InvalidArgument("parser needs at least one encoder layer");
  table.add_uniform(std::string(kParserEncoderPrefix) + "embed", {vocab, config.embed_dim}, config.init_range, rng);
  for (Index k = 0; k < config.layers; ++k) {
    const Index in = k == 0 ? config.embed_dim : 2 * config.hidden_dim;
    LstmParams<double>::create(table, layer_prefix(k, "fwd"), in, config.hidden_dim, config.init_range, rng);
    LstmParams<double>::create(table, layer_prefix(k, "bwd"), in, config.hidden_dim, config.init_range, rng);
  }
}

ParserEncoder ParserEncoder::bind(const ParamTable<double>& table, Index layers) {
  ParserEncoder e;
  e.embed = table.get(std::string(kParserEncoderPrefix) + "embed");
  for (Index k = 0; k < layers; ++k) {
    e.fwd.push_back(LstmParams<double>::bind(table, layer_prefix(k, "fwd")));
    e.bwd.push_back(LstmParams<double>::bind(table, layer_prefix(k, "bwd")));
  }
  return e;
}

std::vector<Tensord> ParserEncoder::encode_batch(const std::vector<std::vector<data::TokenId>>& ids) const {
  if (ids.empty()) throw InvalidArgument("parser encode: empty batch");
  std::vector<Index> lengths;
  Index steps = 0;
  for (const auto& s : ids) {
    if (s.empty()) throw InvalidArgument("parser encode: empty sentence");
    lengths.push_back(static_cast<Index>(s.size()));
    steps = std::max(steps, lengths.back());
  }
  std::vector<Tensord> inputs;
  for (Index t = 0; t < steps; ++t) {
    std::vector<Index> rows;
    for (const auto& s : ids) rows.push_back(t < static_cast<Index>(s.size()) ? s[static_cast<std::size_t>(t)] : 0);
    inputs.push_back(gather_rows(embed, rows));
  }
  for (std::size_t k = 0; k < fwd.size(); ++k) {
    inputs = birnn_encode(inputs, LstmCell<double>{fwd[k]}, LstmCell<double>{bwd[k]}, lengths).states;
  }
  return inputs;
}

Tensord ParserEncoder::encode(const std::vector<data::TokenId>& ids) const {
  return concat(encode_batch({ids}), 0);
}

Tensord sentence_rows(const std::vector<Tensord>& states, Index b, Index n) {
  if (n > static_cast<Index>(states.size())) throw ShapeError("sentence_rows: sentence longer than batch");
  if (states.front().rows() == 1) {
    return n == static_cast<Index>(states.size()) ? concat(states, 0)
                                                  : concat(std::vector<Tensord>(states.begin(), states.begin() + n), 0);
  }
  std::vector<Tensord> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) rows.push_back(slice(states[static_cast<std::size_t>(t)], 0, b, 1));
  return concat(rows, 0);
}

struct BiaffineParser::ScorerLayers {
  Tensord arc_head;    // [n+1, a], row 0 is the root
  Tensord arc_dep;     // [n, a]
  Tensord label_head;  // [n+1, l]
  Tensord label_dep;   // [n, l]
};

BiaffineParser::BiaffineParser(ParserConfig config, data::Vocabulary words, std::vector<std::string> labels)
    : config_(config), words_(std::move(words)), labels_(std::move(labels)) {
  if (labels_.empty()) throw InvalidArgument("parser needs at least one dependency label");
  Rng rng(config_.seed);
  const Index d = config_.encoding_dim();
  const Index a = config_.arc_dim;
  const Index l = config_.label_dim;
  const auto L = static_cast<Index>(labels_.size());
  ParserEncoder::create(params_, static_cast<Index>(words_.size()), config_, rng);
  const double r = config_.init_range;
  params_.add_uniform("parser.scorer.root", {1, d}, r, rng);
  LinearParams<double>::create(params_, "parser.scorer.arc_head", d, a, r, rng);
  LinearParams<double>::create(params_, "parser.scorer.arc_dep", d, a, r, rng);
  params_.add_uniform("parser.scorer.arc_U", {a, a}, r, rng);
  params_.add_uniform("parser.scorer.arc_u", {a, 1}, r, rng);
  LinearParams<double>::create(params_, "parser.scorer.label_head", d, l, r, rng);
  LinearParams<double>::create(params_, "parser.scorer.label_dep", d, l, r, rng);
  params_.add_uniform("parser.scorer.label_U", {l, L * l}, r, rng);
  LinearParams<double>::create(params_, "parser.scorer.label_lin", 2 * l, L, r, rng);
}

ParserEncoder BiaffineParser::encoder() const { return ParserEncoder::bind(params_, config_.layers); }

std::vector<data::TokenId> BiaffineParser::ids(const std::vector<std::string>& tokens) const {
  return words_.encode(tokens);
}

Tensord BiaffineParser::encode(const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw InvalidArgument("parser_encode: empty sentence");
  return encoder().encode(ids(tokens));
}

BiaffineParser::ScorerLayers BiaffineParser::scorer_forward(const Tensord& encoding) const {
  if (encoding.rank() != 2 || encoding.cols() != config_.encoding_dim()) {
    throw ShapeError("score_arcs: encoding must be [n, " + std::to_string(config_.encoding_dim()) + "]");
  }
  auto mlp = [&](const Tensord& x, const char* name) {
    return tanh(LinearParams<double>::bind(params_, std::string("parser.scorer.") + name)(x));
  };
  Tensord with_root = concat<double>({params_.get("parser.scorer.root"), encoding}, 0);
  return {mlp(with_root, "arc_head"), mlp(encoding, "arc_dep"), mlp(with_root, "label_head"),
          mlp(encoding, "label_dep")};
}

namespace {

// Dependent-major arc logits [n, n+1] with self-arcs masked.
Tensord arc_logits(const Tensord& head, const Tensord& dep, const Tensord& U, const Tensord& u) {
  const Index n = dep.rows();
  Tensord bilinear = matmul(dep, transpose(matmul(head, U)));
  Tensord logits = add(bilinear, transpose(matmul(head, u)));
  MatrixX<double> mask = MatrixX<double>::Zero(n, n + 1);
  for (Index i = 0; i < n; ++i) mask(i, i + 1) = kMaskValue;
  return add(logits, Tensord::from_matrix(std::move(mask)));
}

}  // namespace

Tensord BiaffineParser::tree_loss(const Tensord& encoding, const DependencyTree& gold) const {
  const Index n = encoding.rows();
  if (static_cast<Index>(gold.size()) != n) throw InvalidArgument("tree_loss: tree/encoding length mismatch");
  auto layers = scorer_forward(encoding);
  Tensord logits = arc_logits(layers.arc_head, layers.arc_dep, params_.get("parser.scorer.arc_U"),
                              params_.get("parser.scorer.arc_u"));
  std::vector<Index> heads(gold.heads.begin(), gold.heads.end());
  const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  Tensord loss = cross_entropy(logits, heads, ones);
  if (gold.labels.empty()) return loss;

  const Index l = config_.label_dim;
  const auto L = static_cast<Index>(labels_.size());
  Tensord head_rows = gather_rows(layers.label_head, heads);
  Tensord projected = matmul(layers.label_dep, params_.get("parser.scorer.label_U"));
  std::vector<Tensord> columns;
  for (Index k = 0; k < L; ++k) columns.push_back(row_dots(slice(projected, 1, k * l, l), head_rows));
  Tensord label_logits = add(concat(columns, 1), LinearParams<double>::bind(params_, "parser.scorer.label_lin")(
                                                     concat<double>({head_rows, layers.label_dep}, 1)));
  std::vector<Index> label_ids;
  for (const auto& name : gold.labels) {
    auto it = std::find(labels_.begin(), labels_.end(), name);
    label_ids.push_back(it == labels_.end() ? 0 : static_cast<Index>(it - labels_.begin()));
  }
  return add(loss, cross_entropy(label_logits, label_ids, ones));
}

Tensord BiaffineParser::loss(const std::vector<ParsedSentence>& batch) const {
  if (batch.empty()) throw InvalidArgument("parser loss: empty batch");
  std::vector<std::vector<data::TokenId>> batch_ids;
  Index tokens = 0;
  for (const auto& s : batch) {
    batch_ids.push_back(ids(s.tokens));
    tokens += static_cast<Index>(s.tokens.size());
  }
  auto states = encoder().encode_batch(batch_ids);
  Tensord total;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    Tensord enc = sentence_rows(states, static_cast<Index>(b), static_cast<Index>(batch[b].tokens.size()));
    Tensord part = tree_loss(enc, batch[b].tree);
    total = total.defined() ? add(total, part) : part;
  }
  return scale(total, 1.0 / static_cast<double>(tokens));
}

ArcScores BiaffineParser::score_arcs(const Tensord& encoding) const {
  NoGradScope<double> no_grad;
  const Index n = encoding.rows();
  auto layers = scorer_forward(encoding);
  Tensord logits = arc_logits(layers.arc_head, layers.arc_dep, params_.get("parser.scorer.arc_U"),
                              params_.get("parser.scorer.arc_u"));
  ArcScores out;
  out.arcs = logits.value().transpose();
  for (Index d = 1; d <= n; ++d) out.arcs(d, d - 1) = -std::numeric_limits<double>::infinity();

  const Index l = config_.label_dim;
  const auto& U = params_.get("parser.scorer.label_U").value();
  const auto& W = params_.get("parser.scorer.label_lin.W").value();
  const auto& b = params_.get("parser.scorer.label_lin.b").value();
  const auto& RH = layers.label_head.value();
  const auto& RD = layers.label_dep.value();
  out.label_names = labels_;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const auto kk = static_cast<Index>(k);
    MatrixX<double> dep_major = (RD * U.middleCols(kk * l, l)) * RH.transpose();  // [n, n+1]
    Eigen::VectorXd head_term = RH * W.block(0, kk, l, 1);
    Eigen::VectorXd dep_term = RD * W.block(l, kk, l, 1);
    MatrixX<double> s = dep_major.transpose();
    s.colwise() += head_term;
    s.rowwise() += dep_term.transpose();
    s.array() += b(0, kk);
    out.labels.push_back(std::move(s));
  }
  return out;
}

DependencyTree BiaffineParser::parse(const std::vector<std::string>& tokens) const {
  NoGradScope<double> no_grad;
  return decode_projective(score_arcs(encode(tokens)));
}

std::vector<DependencyTree> BiaffineParser::parse_all(const std::vector<ParsedSentence>& sentences) const {
  std::vector<DependencyTree> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(parse(s.tokens));
  return out;
}

std::string BiaffineParser::serialize() const {
  Metadata meta = config_meta(config_);
  meta["kind"] = "parser";
  std::ostringstream vocab;
  words_.save(vocab);
  meta["parser.vocab"] = vocab.str();
  meta["parser.labels"] = join_lines(labels_);
  return serialize_params(params_, meta);
}

BiaffineParser BiaffineParser::deserialize(const std::string& bytes) {
  auto ck = deserialize_checkpoint<double>(bytes);
  auto kind = ck.meta.find("kind");
  if (kind == ck.meta.end() || kind->second != "parser") throw DataError("checkpoint is not a parser");
  ParserConfig config;
  config.embed_dim = meta_index(ck.meta, "parser.embed_dim");
  config.hidden_dim = meta_index(ck.meta, "parser.hidden_dim");
  config.layers = meta_index(ck.meta, "parser.layers");
  config.arc_dim = meta_index(ck.meta, "parser.arc_dim");
  config.label_dim = meta_index(ck.meta, "parser.label_dim");
  std::istringstream vocab(ck.meta.at("parser.vocab"));
  BiaffineParser parser(config, data::Vocabulary::load(vocab), split_lines(ck.meta.at("parser.labels")));
  load_into(parser.params_, ck);
  return parser;
}

void BiaffineParser::save(const std::string& path) const { write_bytes(path, serialize()); }

BiaffineParser BiaffineParser::load(const std::string& path) { return deserialize(read_file_bytes(path)); }

BiaffineParser train_parser(const std::vector<ParsedSentence>& treebank, const ParserConfig& config,
                            const std::function<void(const ParserEpoch&)>& on_epoch) {
  if (treebank.empty()) throw InvalidArgument("train_parser: empty treebank");
  if (config.batch_size == 0) throw InvalidArgument("train_parser: batch_size must be positive");
  std::vector<ParsedSentence> train;
  std::vector<std::string> labels;
  for (const auto& s : treebank) {
    ParsedSentence copy = s;
    if (!is_projective(copy.tree)) {
      if (!config.projectivize) continue;
      copy.tree = projectivize(copy.tree);
    }
    for (const auto& lab : copy.tree.labels) {
      if (std::find(labels.begin(), labels.end(), lab) == labels.end()) labels.push_back(lab);
    }
    train.push_back(std::move(copy));
  }
  if (train.empty()) throw InvalidArgument("train_parser: no usable training trees");
  if (labels.empty()) labels.push_back("dep");
  std::vector<data::Sentence> words;
  for (const auto& s : train) words.push_back(s.tokens);
  BiaffineParser parser(config, data::build_vocab(words, config.max_vocab, config.min_freq), labels);

  AdamState<double> adam;
  Rng rng = Rng::derive(config.seed, 17);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<ParsedSentence> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(train[order[i]]);
      }
      Tape<double> tape;
      {
        TapeScope<double> scope(tape);
        Tensord loss = parser.loss(batch);
        tape.backward(loss);
        loss_sum += loss.item();
      }
      clip_gradients(parser.params(), config.clip);
      adam_step(parser.params(), adam, config.learning_rate);
      parser.params().zero_grads();
      ++batches;
    }
    if (on_epoch) on_epoch({epoch, loss_sum / static_cast<double>(batches)});
  }
  return parser;
}

}  // namespace sawr::depparse
