#include "sawr/seq2seq/model.hpp"

#include <algorithm>
#include <sstream>

#include "sawr/data/linearize.hpp"
#include "sawr/hash.hpp"
#include "sawr/nn/recurrent.hpp"
#include "sawr/syntax/sawr.hpp"
#include "sawr/syntax/tree_gru.hpp"
#include "sawr/tensor/ops.hpp"

namespace sawr::seq2seq {

namespace {

constexpr double kMaskValue = -1e9;

std::string vocab_text(const data::Vocabulary& v) {
  std::ostringstream out;
  v.save(out);
  return out.str();
}

data::Vocabulary vocab_from(const std::string& text) {
  std::istringstream in(text);
  return data::Vocabulary::load(in);
}

Index meta_index(const Metadata& meta, const std::string& key) {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("translation checkpoint lacks " + key);
  return static_cast<Index>(std::stoll(it->second));
}

}  // namespace

std::string to_string(SyntaxMode mode) {
  switch (mode) {
    case SyntaxMode::none:
      return "baseline";
    case SyntaxMode::sawr:
      return "sawr";
    case SyntaxMode::tree_rnn:
      return "tree-rnn";
    case SyntaxMode::tree_linearized:
      return "tree-linearized";
  }
  return "baseline";
}

SyntaxMode parse_syntax_mode(const std::string& name) {
  if (name == "baseline" || name == "none") return SyntaxMode::none;
  if (name == "sawr" || name == "sawr-tuned") return SyntaxMode::sawr;
  if (name == "tree-rnn") return SyntaxMode::tree_rnn;
  if (name == "tree-linearized") return SyntaxMode::tree_linearized;
  throw InvalidArgument("unknown syntax mode '" + name + "'");
}

Attention attend(const Tensord& s_prev, const Tensord& keys, const Eigen::MatrixXd& mask, const Tensord& Wa) {
  if (s_prev.cols() != Wa.rows() || keys.cols() != Wa.cols()) {
    throw ShapeError("attend: state " + shape_string(s_prev.shape()) + ", keys " + shape_string(keys.shape()) +
                     ", Wa " + shape_string(Wa.shape()));
  }
  Tensord scores = row_dots(matmul(s_prev, Wa), keys);
  if (mask.size() != 0) {
    if (mask.rows() != scores.rows() || mask.cols() != scores.cols()) throw ShapeError("attend: mask shape");
    scores = add(scores, Tensord::from_matrix(mask));
  }
  Tensord alpha = softmax(scores, 1);
  return {weighted_rows(alpha, keys), alpha};
}

EncoderOutput EncoderOutput::repeat(Index k) const {
  if (batch() != 1) throw InvalidArgument("EncoderOutput::repeat needs a single sentence");
  const Index steps = this->steps();
  MatrixX<double> rows(steps * k, keys.cols());
  for (Index t = 0; t < steps; ++t) rows.middleRows(t * k, k) = keys.value().row(t).replicate(k, 1);
  EncoderOutput out;
  out.keys = Tensord::from_matrix(std::move(rows));
  if (mask.size() != 0) out.mask = mask.replicate(k, 1);
  out.lengths.assign(static_cast<std::size_t>(k), lengths.front());
  out.backward_final = Tensord::from_matrix(backward_final.value().replicate(k, 1));
  return out;
}

TranslationModel::TranslationModel(ModelConfig config, data::Vocabulary src, data::Vocabulary tgt,
                                   const depparse::BiaffineParser* parser)
    : config_(config), src_(std::move(src)), tgt_(std::move(tgt)) {
  if (config_.hidden_dim <= 0 || config_.hidden_dim % 2 != 0) {
    throw InvalidArgument("hidden_dim must be a positive even number (two encoder halves)");
  }
  if (config_.mode == SyntaxMode::sawr) {
    if (!parser) throw InvalidArgument("sawr mode needs a parser");
    parser_words_ = parser->words();
    parser_layers_ = parser->config().layers;
    parser_dim_ = parser->config().encoding_dim();
    for (const auto& name : parser->params().names_with_prefix(depparse::kParserEncoderPrefix)) {
      params_.add(name, parser->params().get(name).clone(true));
    }
    notes_["parser.embed_dim"] = std::to_string(parser->config().embed_dim);
    notes_["parser.hidden_dim"] = std::to_string(parser->config().hidden_dim);
  }
  Rng rng(config_.seed);
  const double r = config_.init_range;
  const Index E = config_.embed_dim;
  const Index H = config_.hidden_dim;
  const Index D = config_.decoder_dim;
  params_.add_uniform("src.embed", {static_cast<Index>(src_.size()), E}, r, rng);
  if (config_.mode == SyntaxMode::sawr) {
    LinearParams<double>::create(params_, "sawr.proj", parser_dim_, config_.sawr_dim, r, rng);
  }
  if (config_.mode == SyntaxMode::tree_rnn) {
    syntax::TreeGruParams::create(params_, "tree", E, config_.tree_hidden_dim, r, rng);
  }
  GruParams<double>::create(params_, "encoder.fwd", encoder_input_dim(), H / 2, r, rng);
  GruParams<double>::create(params_, "encoder.bwd", encoder_input_dim(), H / 2, r, rng);
  LinearParams<double>::create(params_, "decoder.init", H / 2, D, r, rng);
  params_.add_uniform("attention.W", {D, H}, r, rng);
  params_.add_uniform("tgt.embed", {static_cast<Index>(tgt_.size()), E}, r, rng);
  GruParams<double>::create(params_, "decoder.rnn", E + H, D, r, rng);
  LinearParams<double>::create(params_, "output.hidden", D + H, config_.output_hidden_dim, r, rng);
  LinearParams<double>::create(params_, "output.logits", config_.output_hidden_dim, static_cast<Index>(tgt_.size()),
                               r, rng);
  if (config_.mode == SyntaxMode::sawr) set_parser_trainable(*this, false);
}

Index TranslationModel::encoder_input_dim() const {
  switch (config_.mode) {
    case SyntaxMode::sawr:
      return config_.embed_dim + config_.sawr_dim;
    case SyntaxMode::tree_rnn:
      return 2 * config_.tree_hidden_dim;
    default:
      return config_.embed_dim;
  }
}

std::vector<std::string> TranslationModel::parser_param_names() const {
  return params_.names_with_prefix(depparse::kParserEncoderPrefix);
}

std::unordered_set<std::string> TranslationModel::frozen_names() const {
  std::unordered_set<std::string> out;
  if (config_.mode == SyntaxMode::sawr && !parser_trainable_) {
    for (const auto& n : parser_param_names()) out.insert(n);
  }
  return out;
}

void set_parser_trainable(TranslationModel& model, bool trainable) {
  if (model.mode() != SyntaxMode::sawr) throw InvalidState("set_parser_trainable: model is not in sawr mode");
  model.parser_trainable_ = trainable;
  for (const auto& n : model.parser_param_names()) model.params_.get(n).set_requires_grad(trainable);
}

data::Batch TranslationModel::source_batch(const std::vector<SourceSentence>& sources) const {
  std::vector<data::Example> examples;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].words.empty()) throw InvalidArgument("empty source sentence");
    examples.push_back({src_.encode(sources[i].words), {}, i});
  }
  auto batch = data::make_batch(examples);
  for (const auto& s : sources) {
    batch.src_words.push_back(s.words);
    if (s.tree) batch.trees.push_back(*s.tree);
    if (s.encoding) batch.encodings.push_back(*s.encoding);
  }
  if (!batch.trees.empty() && batch.trees.size() != sources.size()) throw InvalidArgument("trees missing for some sources");
  if (!batch.encodings.empty() && batch.encodings.size() != sources.size()) batch.encodings.clear();
  return batch;
}

data::Batch TranslationModel::training_batch(const std::vector<SourceSentence>& sources,
                                             const std::vector<data::Sentence>& targets) const {
  if (sources.size() != targets.size()) throw InvalidArgument("training_batch: source/target counts differ");
  std::vector<data::Example> examples;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].words.empty()) throw InvalidArgument("empty source sentence");
    examples.push_back({src_.encode(sources[i].words), tgt_.encode(targets[i]), i});
  }
  auto batch = data::make_batch(examples);
  attach_sources(batch, sources);
  return batch;
}

SourceSentence prepare_source(SyntaxMode mode, const data::Sentence& words,
                              const std::optional<depparse::DependencyTree>& tree,
                              const std::optional<Eigen::MatrixXd>& encoding) {
  switch (mode) {
    case SyntaxMode::tree_linearized:
      if (!tree) throw InvalidArgument("tree-linearized mode needs a source tree");
      return {data::linearize_tree(words, *tree), std::nullopt, std::nullopt};
    case SyntaxMode::tree_rnn:
      if (!tree) throw InvalidArgument("tree-rnn mode needs a source tree");
      return {words, tree, std::nullopt};
    case SyntaxMode::sawr:
      return {words, std::nullopt, encoding};
    case SyntaxMode::none:
      break;
  }
  return {words, std::nullopt, std::nullopt};
}

void attach_sources(data::Batch& batch, const std::vector<SourceSentence>& corpus) {
  batch.src_words.clear();
  batch.trees.clear();
  batch.encodings.clear();
  bool trees = true;
  bool encodings = true;
  for (std::size_t id : batch.ids) {
    if (id >= corpus.size()) throw InvalidArgument("attach_sources: example id out of range");
    const auto& s = corpus[id];
    batch.src_words.push_back(s.words);
    trees = trees && s.tree.has_value();
    encodings = encodings && s.encoding.has_value();
  }
  for (std::size_t id : batch.ids) {
    if (trees) batch.trees.push_back(*corpus[id].tree);
    if (encodings) batch.encodings.push_back(*corpus[id].encoding);
  }
}

std::vector<Tensord> TranslationModel::encoder_inputs(const data::Batch& batch) const {
  const Index B = static_cast<Index>(batch.size());
  const Index T = static_cast<Index>(batch.src_width());
  if (B == 0 || T == 0) throw InvalidArgument("encode: empty source batch");
  const auto& embed = params_.get("src.embed");
  std::vector<Tensord> inputs;

  if (config_.mode == SyntaxMode::tree_rnn) {
    if (batch.trees.size() != batch.size()) throw InvalidArgument("tree-rnn mode needs a tree per source sentence");
    std::vector<Index> ids;
    std::vector<Index> offset;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch.trees[b].size() != batch.src_lengths[b]) {
        throw InvalidArgument("tree-rnn: tree/token length mismatch in row " + std::to_string(b));
      }
      offset.push_back(static_cast<Index>(ids.size()));
      for (std::size_t t = 0; t < batch.src_lengths[b]; ++t) ids.push_back(batch.src[b][t]);
    }
    Tensord nodes = syntax::tree_gru_encode_batch(gather_rows(embed, ids), batch.trees,
                                                   syntax::TreeGruParams::bind(params_, "tree"));
    for (Index t = 0; t < T; ++t) {
      std::vector<Index> rows;
      for (std::size_t b = 0; b < batch.size(); ++b) {
        rows.push_back(t < static_cast<Index>(batch.src_lengths[b]) ? offset[b] + t : 0);
      }
      inputs.push_back(gather_rows(nodes, rows));
    }
    return inputs;
  }

  for (Index t = 0; t < T; ++t) {
    std::vector<Index> rows;
    for (std::size_t b = 0; b < batch.size(); ++b) rows.push_back(batch.src[b][static_cast<std::size_t>(t)]);
    inputs.push_back(gather_rows(embed, rows));
  }
  if (config_.mode != SyntaxMode::sawr) return inputs;

  syntax::SawrProjection proj{params_.get("sawr.proj.W"), params_.get("sawr.proj.b")};
  std::vector<Tensord> encodings;
  if (!parser_trainable_ && batch.encodings.size() == batch.size()) {
    for (Index t = 0; t < T; ++t) {
      MatrixX<double> o = MatrixX<double>::Zero(B, parser_dim_);
      for (Index b = 0; b < B; ++b) {
        const auto& m = batch.encodings[static_cast<std::size_t>(b)];
        if (m.cols() != parser_dim_ || m.rows() != static_cast<Index>(batch.src_lengths[static_cast<std::size_t>(b)])) {
          throw ShapeError("cached SAWR record does not match the source sentence");
        }
        if (t < m.rows()) o.row(b) = m.row(t);
      }
      encodings.push_back(Tensord::from_matrix(std::move(o)));
    }
  } else {
    if (batch.src_words.size() != batch.size()) throw InvalidArgument("sawr mode needs source words");
    std::vector<std::vector<TokenId>> ids;
    for (const auto& w : batch.src_words) ids.push_back(parser_words_.encode(w));
    encodings = depparse::ParserEncoder::bind(params_, parser_layers_).encode_batch(ids);
  }
  for (Index t = 0; t < T; ++t) {
    inputs[static_cast<std::size_t>(t)] =
        syntax::sawr_augment(inputs[static_cast<std::size_t>(t)],
                             syntax::sawr_project(encodings[static_cast<std::size_t>(t)], proj));
  }
  return inputs;
}

EncoderOutput TranslationModel::encode(const data::Batch& batch) const {
  auto inputs = encoder_inputs(batch);
  std::vector<Index> lengths(batch.src_lengths.begin(), batch.src_lengths.end());
  GruCell<double> fwd{GruParams<double>::bind(params_, "encoder.fwd")};
  GruCell<double> bwd{GruParams<double>::bind(params_, "encoder.bwd")};
  auto out = birnn_encode(inputs, fwd, bwd, lengths);
  EncoderOutput enc;
  enc.keys = concat(out.states, 0);
  enc.lengths = lengths;
  enc.backward_final = out.backward_final;
  const Index T = static_cast<Index>(inputs.size());
  if (std::any_of(lengths.begin(), lengths.end(), [&](Index l) { return l != T; })) {
    enc.mask = Eigen::MatrixXd::Zero(static_cast<Index>(lengths.size()), T);
    for (std::size_t b = 0; b < lengths.size(); ++b) {
      for (Index t = lengths[b]; t < T; ++t) enc.mask(static_cast<Index>(b), t) = kMaskValue;
    }
  }
  return enc;
}

DecoderState TranslationModel::initial_state(const EncoderOutput& enc) const {
  auto init = LinearParams<double>::bind(params_, "decoder.init");
  return {tanh(init(enc.backward_final)), Tensord::zeros({enc.batch(), config_.hidden_dim})};
}

StepOutput TranslationModel::decode_step(const std::vector<TokenId>& y_prev, const DecoderState& state,
                                         const EncoderOutput& enc, Mode mode, Rng* rng) const {
  if (static_cast<Index>(y_prev.size()) != state.s.rows()) throw ShapeError("decode_step: batch size mismatch");
  for (TokenId y : y_prev) {
    if (y < 0 || y >= static_cast<TokenId>(tgt_.size())) {
      throw InvalidArgument("decode_step: target id " + std::to_string(y) + " out of range");
    }
  }
  std::vector<Index> rows(y_prev.begin(), y_prev.end());
  Tensord e = gather_rows(params_.get("tgt.embed"), rows);
  Tensord s = gru_step(concat<double>({e, state.c}, 1), state.s, GruParams<double>::bind(params_, "decoder.rnn"));
  Attention att = attend(s, enc.keys, enc.mask, params_.get("attention.W"));
  Tensord hidden = tanh(LinearParams<double>::bind(params_, "output.hidden")(concat<double>({s, att.context}, 1)));
  if (mode == Mode::train) {
    if (!rng) throw InvalidArgument("decode_step: train mode needs an rng");
    hidden = dropout(hidden, config_.dropout, mode, *rng);
  }
  Tensord logits = LinearParams<double>::bind(params_, "output.logits")(hidden);
  return {logits, {s, att.context}, att.weights};
}

Tensord TranslationModel::batch_loss(const data::Batch& batch, Mode mode, Rng& rng) const {
  if (batch.size() == 0) throw InvalidArgument("batch_loss: empty batch");
  auto enc = encode(batch);
  auto state = initial_state(enc);
  const std::size_t B = batch.size();
  const std::size_t U = batch.tgt_width();
  std::vector<TokenId> prev(B, data::Vocabulary::kBos);
  Tensord total;
  double tokens = 0;
  for (std::size_t j = 0; j <= U; ++j) {
    auto step = decode_step(prev, state, enc, mode, &rng);
    std::vector<Index> targets(B);
    std::vector<double> weights(B);
    for (std::size_t b = 0; b < B; ++b) {
      const std::size_t len = batch.tgt_lengths[b];
      targets[b] = j < len ? batch.tgt[b][j] : (j == len ? data::Vocabulary::kEos : data::Vocabulary::kPad);
      weights[b] = j <= len ? 1.0 : 0.0;
      tokens += weights[b];
      prev[b] = static_cast<TokenId>(targets[b]);
    }
    Tensord part = cross_entropy(step.logits, targets, weights);
    total = total.defined() ? add(total, part) : part;
    state = step.state;
  }
  return scale(total, 1.0 / tokens);
}

double TranslationModel::sequence_log_prob(const data::Batch& single_source, const std::vector<TokenId>& tokens) const {
  NoGradScope<double> no_grad;
  data::Batch b = single_source;
  b.tgt = {tokens};
  b.tgt_lengths = {tokens.size()};
  Rng unused(0);
  return -batch_loss(b, Mode::eval, unused).item() * static_cast<double>(tokens.size() + 1);
}

std::string TranslationModel::serialize() const {
  Metadata meta = notes_;
  meta["kind"] = "translation";
  meta["mode"] = to_string(config_.mode);
  meta["embed_dim"] = std::to_string(config_.embed_dim);
  meta["hidden_dim"] = std::to_string(config_.hidden_dim);
  meta["decoder_dim"] = std::to_string(config_.decoder_dim);
  meta["output_hidden_dim"] = std::to_string(config_.output_hidden_dim);
  meta["sawr_dim"] = std::to_string(config_.sawr_dim);
  meta["tree_hidden_dim"] = std::to_string(config_.tree_hidden_dim);
  meta["dropout"] = std::to_string(config_.dropout);
  meta["src.vocab"] = vocab_text(src_);
  meta["tgt.vocab"] = vocab_text(tgt_);
  if (config_.mode == SyntaxMode::sawr) {
    meta["parser.vocab"] = vocab_text(parser_words_);
    meta["parser.layers"] = std::to_string(parser_layers_);
    meta["parser.trainable"] = parser_trainable_ ? "1" : "0";
  }
  return serialize_params(params_, meta);
}

TranslationModel TranslationModel::deserialize(const std::string& bytes) {
  auto ck = deserialize_checkpoint<double>(bytes);
  const auto& meta = ck.meta;
  auto kind = meta.find("kind");
  if (kind == meta.end() || kind->second != "translation") throw DataError("checkpoint is not a translation model");
  ModelConfig config;
  config.mode = parse_syntax_mode(meta.at("mode"));
  config.embed_dim = meta_index(meta, "embed_dim");
  config.hidden_dim = meta_index(meta, "hidden_dim");
  config.decoder_dim = meta_index(meta, "decoder_dim");
  config.output_hidden_dim = meta_index(meta, "output_hidden_dim");
  config.sawr_dim = meta_index(meta, "sawr_dim");
  config.tree_hidden_dim = meta_index(meta, "tree_hidden_dim");
  config.dropout = std::stod(meta.at("dropout"));
  std::optional<depparse::BiaffineParser> shell;
  if (config.mode == SyntaxMode::sawr) {
    depparse::ParserConfig pc;
    pc.embed_dim = meta_index(meta, "parser.embed_dim");
    pc.hidden_dim = meta_index(meta, "parser.hidden_dim");
    pc.layers = meta_index(meta, "parser.layers");
    pc.arc_dim = 1;
    pc.label_dim = 1;
    shell.emplace(pc, vocab_from(meta.at("parser.vocab")), std::vector<std::string>{"dep"});
  }
  TranslationModel model(config, vocab_from(meta.at("src.vocab")), vocab_from(meta.at("tgt.vocab")),
                         shell ? &*shell : nullptr);
  load_into(model.params_, ck);
  if (config.mode == SyntaxMode::sawr) set_parser_trainable(model, meta.at("parser.trainable") == "1");
  for (const auto& [k, v] : meta) {
    if (k.rfind("note.", 0) == 0) model.notes_[k] = v;
  }
  return model;
}

void TranslationModel::save(const std::string& path) const { write_bytes(path, serialize()); }

TranslationModel TranslationModel::load(const std::string& path) { return deserialize(read_file_bytes(path)); }

}  // namespace sawr::seq2seq
