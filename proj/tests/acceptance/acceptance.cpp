// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sawr/cli/commands.hpp"
#include "sawr/cli/config.hpp"
#include "sawr/data/bpe.hpp"
#include "sawr/data/corpus.hpp"
#include "sawr/data/linearize.hpp"
#include "sawr/depparse/eisner.hpp"
#include "sawr/depparse/metrics.hpp"
#include "sawr/depparse/parser.hpp"
#include "sawr/depparse/treebank.hpp"
#include "sawr/eval/bleu.hpp"
#include "sawr/eval/significance.hpp"
#include "sawr/hash.hpp"
#include "sawr/nn/recurrent.hpp"
#include "sawr/seq2seq/beam.hpp"
#include "sawr/seq2seq/model.hpp"
#include "sawr/seq2seq/trainer.hpp"
#include "sawr/syntax/sawr.hpp"
#include "sawr/syntax/tree_gru.hpp"
#include "sawr/tensor/grad_check.hpp"

namespace fs = std::filesystem;
using namespace sawr;
using data::Sentence;
using data::TokenId;
using seq2seq::SourceSentence;
using seq2seq::SyntaxMode;
using seq2seq::TranslationModel;
using T = Tensor<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

data::Vocabulary vocab_of(const std::vector<std::string>& words) {
  data::Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

const std::vector<std::string> kSrcWords{"a", "b", "c", "d", "e"};
const std::vector<std::string> kTgtWords{"w", "x", "y", "z"};

seq2seq::ModelConfig tiny_model(SyntaxMode mode, std::uint64_t seed, double range = 0.5) {
  seq2seq::ModelConfig c;
  c.mode = mode;
  c.embed_dim = 3;
  c.hidden_dim = 4;
  c.decoder_dim = 3;
  c.output_hidden_dim = 3;
  c.sawr_dim = 2;
  c.tree_hidden_dim = 2;
  c.dropout = 0;
  c.init_range = range;
  c.seed = seed;
  return c;
}

depparse::ParserConfig tiny_parser(std::uint64_t seed) {
  depparse::ParserConfig c;
  c.embed_dim = 3;
  c.hidden_dim = 2;
  c.layers = 1;
  c.arc_dim = 2;
  c.label_dim = 2;
  c.init_range = 0.5;
  c.seed = seed;
  return c;
}

Sentence random_words(Rng& rng, std::size_t max_len) {
  Sentence s;
  const std::size_t n = 1 + rng.index(max_len);
  for (std::size_t i = 0; i < n; ++i) s.push_back(kSrcWords[rng.index(kSrcWords.size())]);
  return s;
}

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
  const auto start = Clock::now();
  constexpr int kTrials = 100;
  std::vector<std::pair<std::string, double>> worst;
  auto record = [&](const std::string& name, double e) {
    for (auto& [n, w] : worst) {
      if (n == name) {
        w = std::max(w, e);
        return;
      }
    }
    worst.emplace_back(name, e);
  };
  Rng rng(101);
  auto rows = [&](Index r, Index c) { return init_uniform<double>({r, c}, -1, 1, rng); };

  for (int trial = 0; trial < kTrials; ++trial) {
    const auto seed = 1000 + static_cast<std::uint64_t>(trial);
    const Index in = 1 + static_cast<Index>(rng.index(3));
    const Index hid = 1 + static_cast<Index>(rng.index(3));

    {
      ParamTable<double> table;
      Rng init(seed);
      GruParams<double>::create(table, "g", in, hid, 1.0, init);
      T x = rows(2, in), h = rows(2, hid), w = rows(2, hid);
      auto forward = [&] { return sum(mul(gru_step(x, h, GruParams<double>::bind(table, "g")), w)); };
      auto p = GruParams<double>::bind(table, "g");
      record("gru step", std::max({oracle::worst_param_error(table, forward),
                                   grad_check<double>([&](const T& v) { return sum(mul(gru_step(v, h, p), w)); }, x, 1e-4),
                                   grad_check<double>([&](const T& v) { return sum(mul(gru_step(x, v, p), w)); }, h, 1e-4)}));
    }
    {
      ParamTable<double> table;
      Rng init(seed);
      LstmParams<double>::create(table, "l", in, hid, 1.0, init);
      T x = rows(2, in), w = rows(2, hid), wc = rows(2, hid);
      LstmState<double> s{rows(2, hid), rows(2, hid)};
      auto forward = [&] {
        auto next = lstm_step(x, s, LstmParams<double>::bind(table, "l"));
        return add(sum(mul(next.h, w)), sum(mul(next.c, wc)));
      };
      record("lstm step", oracle::worst_param_error(table, forward));
    }
    {
      ParamTable<double> table;
      Rng init(seed);
      GruParams<double>::create(table, "gf", in, hid, 1.0, init);
      GruParams<double>::create(table, "gb", in, hid, 1.0, init);
      LstmParams<double>::create(table, "lf", in, hid, 1.0, init);
      LstmParams<double>::create(table, "lb", in, hid, 1.0, init);
      std::vector<T> seq;
      for (int t = 0; t < 3; ++t) seq.push_back(rows(2, in));
      T w = rows(2, 2 * hid);
      const std::vector<Index> lengths{3, 1 + static_cast<Index>(rng.index(3))};
      auto forward = [&] {
        GruCell<double> gf{GruParams<double>::bind(table, "gf")}, gb{GruParams<double>::bind(table, "gb")};
        LstmCell<double> lf{LstmParams<double>::bind(table, "lf")}, lb{LstmParams<double>::bind(table, "lb")};
        auto a = birnn_encode(seq, gf, gb, lengths);
        auto b = birnn_encode(seq, lf, lb, lengths);
        T loss = T::scalar(0);
        for (const auto& s : a.states) loss = add(loss, sum(mul(s, w)));
        for (const auto& s : b.states) loss = add(loss, sum(mul(tanh(s), w)));
        return loss;
      };
      record("bidirectional encoder", oracle::worst_param_error(table, forward));
    }
    {
      const Index h = 2 * (1 + static_cast<Index>(rng.index(2)));
      const Index d = 1 + static_cast<Index>(rng.index(3));
      T keys = rows(6, h), s = rows(2, d), Wa = rows(d, h), pc = rows(2, h), pw = rows(2, 3);
      Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(2, 3);
      if (trial % 2) mask(1, 2) = -1e9;
      auto loss = [&](const T& q, const T& k, const T& w) {
        auto a = seq2seq::attend(q, k, mask, w);
        return add(sum(mul(a.context, pc)), sum(mul(a.weights, pw)));
      };
      record("attention", std::max({grad_check<double>([&](const T& x) { return loss(x, keys, Wa); }, s, 1e-4),
                                    grad_check<double>([&](const T& x) { return loss(s, x, Wa); }, keys, 1e-4),
                                    grad_check<double>([&](const T& x) { return loss(s, keys, x); }, Wa, 1e-4)}));
    }
    {
      TranslationModel m(tiny_model(SyntaxMode::none, seed), vocab_of(kSrcWords), vocab_of(kTgtWords));
      auto batch = m.source_batch({{random_words(rng, 4), {}, {}}, {random_words(rng, 4), {}, {}}});
      const std::vector<TokenId> prev{static_cast<TokenId>(2 + rng.index(6)), static_cast<TokenId>(2 + rng.index(6))};
      const std::vector<TokenId> gold{static_cast<TokenId>(3 + rng.index(5)), static_cast<TokenId>(3 + rng.index(5))};
      auto forward = [&] {
        auto enc = m.encode(batch);
        auto state = m.initial_state(enc);
        auto first = m.decode_step(prev, state, enc);
        auto second = m.decode_step(gold, first.state, enc);
        return add(cross_entropy<double>(first.logits, gold, {1.0, 1.0}),
                   cross_entropy<double>(second.logits, prev, {1.0, 1.0}));
      };
      std::vector<std::string> names;
      for (const char* prefix : {"tgt.embed", "decoder.", "attention.", "output."}) {
        for (const auto& n : m.params().names_with_prefix(prefix)) names.push_back(n);
      }
      record("decoder step + output", oracle::worst_param_error(m.params(), forward, 1e-3, names));
    }
    {
      depparse::BiaffineParser parser(tiny_parser(seed), vocab_of(kSrcWords), {"root"});
      auto config = tiny_model(SyntaxMode::sawr, seed, 0.4);
      config.embed_dim = 2;
      TranslationModel m(config, vocab_of(kSrcWords), vocab_of(kTgtWords), &parser);
      seq2seq::set_parser_trainable(m, true);
      auto batch = m.training_batch({{random_words(rng, 4), {}, {}}, {random_words(rng, 4), {}, {}}},
                                    {{"x", "y"}, {"z"}});
      Rng dropout(seed);
      auto forward = [&] { return m.batch_loss(batch, Mode::train, dropout); };
      auto names = m.params().names_with_prefix("parser.encoder.");
      for (const auto& n : m.params().names_with_prefix("sawr.proj.")) names.push_back(n);
      record("sawr projection (tuned)", oracle::worst_param_error(m.params(), forward, 1e-3, names));
    }
    {
      auto config = tiny_parser(seed);
      depparse::BiaffineParser parser(config, vocab_of(kSrcWords), {"root", "dep", "obj"});
      const int n = 1 + static_cast<int>(rng.index(5));
      auto gold = oracle::random_projective_tree(n, rng);
      for (auto& l : gold.labels) l = l == "l0" ? "root" : (l == "l1" ? "dep" : "obj");
      T encoding = rows(n, config.encoding_dim());
      auto forward = [&] { return parser.tree_loss(encoding, gold); };
      auto scorer = parser.params().names_with_prefix("parser.scorer.");
      record("biaffine scorer + tree loss",
             std::max(oracle::worst_param_error(parser.params(), forward, 1e-4, scorer),
                      grad_check<double>([&](const T& e) { return parser.tree_loss(e, gold); }, encoding, 1e-4)));
    }
    {
      ParamTable<double> table;
      Rng init(seed);
      syntax::TreeGruParams::create(table, "tree", in + 1, hid, 0.5, init);
      const int n = 1 + static_cast<int>(rng.index(6));
      auto tree = oracle::random_projective_tree(n, rng);
      T emb = rows(n, in + 1), w = rows(n, 2 * hid);
      auto forward = [&] {
        return sum(mul(syntax::tree_gru_encode(emb, tree, syntax::TreeGruParams::bind(table, "tree")), w));
      };
      auto p = syntax::TreeGruParams::bind(table, "tree");
      record("tree-gru", std::max(oracle::worst_param_error(table, forward),
                                  grad_check<double>(
                                      [&](const T& e) { return sum(mul(syntax::tree_gru_encode(e, tree, p), w)); },
                                      emb, 1e-4)));
    }
  }

  const double elapsed = seconds_since(start);
  bool pass = elapsed < 300;
  std::ostringstream os;
  for (const auto& [name, w] : worst) {
    pass = pass && w < 1e-4;
    os << name << ' ' << fmt("%.1e", w) << "; ";
  }
  os << kTrials << " trials each, " << fmt("%.1f", elapsed) << " s (limit 300)";
  return {pass, os.str()};
}

// ---------------------------------------------------------------- 2

Outcome probability_invariants() {
  Rng rng(202);
  NoGradScope<double> ng;
  double worst = 0;
  long rows = 0;
  const SyntaxMode modes[] = {SyntaxMode::none, SyntaxMode::sawr, SyntaxMode::tree_rnn, SyntaxMode::tree_linearized};
  std::vector<std::string> src_symbols = kSrcWords;
  for (const char* s : {"(root", "(l0", "(l1", "(l2", ")"}) src_symbols.push_back(s);
  constexpr int kTrials = 1000;
  for (int trial = 0; trial < kTrials; ++trial) {
    const auto seed = 5000 + static_cast<std::uint64_t>(trial);
    const SyntaxMode mode = modes[trial % 4];
    depparse::BiaffineParser parser(tiny_parser(seed), vocab_of(kSrcWords), {"root"});
    TranslationModel m(tiny_model(mode, seed, 1.0), vocab_of(src_symbols), vocab_of(kTgtWords), &parser);
    std::vector<SourceSentence> sources;
    const std::size_t batch = 1 + rng.index(3);
    for (std::size_t b = 0; b < batch; ++b) {
      auto words = random_words(rng, 8);
      auto tree = oracle::random_projective_tree(static_cast<int>(words.size()), rng);
      sources.push_back(seq2seq::prepare_source(mode, words, tree));
    }
    auto enc = m.encode(m.source_batch(sources));
    auto state = m.initial_state(enc);
    std::vector<TokenId> prev(batch, data::Vocabulary::kBos);
    for (int step = 0; step < 4; ++step) {
      auto out = m.decode_step(prev, state, enc);
      const auto probs = softmax(out.logits, 1).value();
      for (Index r = 0; r < probs.rows(); ++r) {
        worst = std::max(worst, std::abs(probs.row(r).sum() - 1.0));
        worst = std::max(worst, std::abs(out.attention.value().row(r).sum() - 1.0));
        ++rows;
      }
      state = out.state;
      for (auto& t : prev) t = static_cast<TokenId>(rng.index(static_cast<std::uint64_t>(probs.cols())));
    }
  }
  return {worst <= 1e-6, std::to_string(kTrials) + " models (all 4 modes), " + std::to_string(rows) +
                             " step rows; max |sum - 1| = " + fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- 3

Outcome eisner_oracle() {
  const auto start = Clock::now();
  Rng rng(303);
  std::vector<std::vector<std::vector<int>>> all(7);
  for (int n = 1; n <= 6; ++n) all[static_cast<std::size_t>(n)] = oracle::all_projective_trees(n);
  int score_mismatch = 0, tree_mismatch = 0, key_mismatch = 0, unique = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    auto s = oracle::random_scores(n, rng);
    auto tree = depparse::decode_projective(s);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_heads;
    for (const auto& heads : all[static_cast<std::size_t>(n)]) {
      const double v = depparse::tree_score(s, {heads, {}});
      if (v > best) {
        best = v;
        best_heads = heads;
      }
    }
    if (!depparse::is_projective(tree) || std::abs(depparse::tree_score(s, tree) - best) > 1e-9) ++score_mismatch;
    if (tree.heads != best_heads) ++tree_mismatch;
  }
  // Integer scores: the tree-level tie-break decides.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    auto s = oracle::random_scores(n, rng, true);
    auto tree = depparse::decode_projective(s);
    oracle::Key best{-1e300, 0, 0};
    std::vector<std::vector<int>> winners;
    for (const auto& heads : all[static_cast<std::size_t>(n)]) {
      auto k = oracle::tie_key(s, heads);
      if (k > best) {
        best = k;
        winners = {heads};
      } else if (k == best) {
        winners.push_back(heads);
      }
    }
    if (oracle::tie_key(s, tree.heads) != best) ++key_mismatch;
    if (winners.size() == 1) {
      ++unique;
      if (tree.heads != winners.front()) ++tree_mismatch;
    }
  }
  const double elapsed = seconds_since(start);
  return {score_mismatch == 0 && tree_mismatch == 0 && key_mismatch == 0 && elapsed < 60,
          "100 real-valued matrices n<=6: " + std::to_string(score_mismatch) + " score / " +
              std::to_string(tree_mismatch) + " tree mismatches; 100 tied integer matrices: " +
              std::to_string(key_mismatch) + " tie-key mismatches (" + std::to_string(unique) +
              " with a unique winner); " + fmt("%.1f", elapsed) + " s"};
}

// ---------------------------------------------------------------- 4

Outcome beam_oracle() {
  const auto start = Clock::now();
  Rng rng(404);
  int exhaustive_fail = 0, greedy_fail = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TranslationModel m(tiny_model(SyntaxMode::none, 700 + seed, 1.5), vocab_of(kSrcWords), vocab_of({}));
    const SourceSentence src{random_words(rng, 5), {}, {}};
    auto single = m.source_batch({src});
    auto hyp = seq2seq::beam_search(m, src, 64, 3);
    auto best = oracle::best_finished(4, 3, [&](const std::vector<TokenId>& seq) {
      return m.sequence_log_prob(single, {seq.begin(), seq.end() - 1});
    });
    if (!hyp.finished || hyp.tokens != best.second || std::abs(hyp.log_prob - best.first) > 1e-9) ++exhaustive_fail;

    TranslationModel wide(tiny_model(SyntaxMode::none, 800 + seed), vocab_of(kSrcWords), vocab_of(kTgtWords));
    auto beam1 = seq2seq::beam_search(wide, src, 1, 8);
    auto greedy = seq2seq::greedy_decode(wide, src, 8);
    if (beam1.tokens != greedy.tokens || beam1.log_prob != greedy.log_prob) ++greedy_fail;
  }
  const double elapsed = seconds_since(start);
  return {exhaustive_fail == 0 && greedy_fail == 0 && elapsed < 60,
          "50 models |V|=4 max_len 3 beam 64: " + std::to_string(exhaustive_fail) +
              " differ from enumeration; beam 1 vs greedy: " + std::to_string(greedy_fail) + " differ; " +
              fmt("%.1f", elapsed) + " s"};
}

// ---------------------------------------------------------------- 5

Outcome bleu_oracle() {
  const std::string dir = std::string(SAWR_FIXTURES) + "/bleu/";
  std::ifstream in(dir + "expected.tsv");
  std::string line;
  double worst = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string name, cs;
    double expected = 0;
    row >> name >> cs >> expected;
    auto r = eval::bleu(data::read_sentences(dir + name + ".hyp"), data::read_sentences(dir + name + ".ref"),
                        cs == "sensitive");
    worst = std::max(worst, std::abs(r.bleu - expected));
    ++rows;
  }
  const auto refs = data::read_sentences(dir + "noisy.ref");
  const bool self = eval::bleu(refs, refs).bleu == 100.0 &&
                    eval::bleu(data::read_sentences(dir + "three.ref"), data::read_sentences(dir + "three.ref")).bleu ==
                        100.0;
  return {rows == 6 && worst <= 0.01 && self, std::to_string(rows) + " fixture scores (3 corpora x 2 casings), max |diff| = " +
                                                  fmt("%.2e", worst) + "; bleu(x,x) == 100.0: " + (self ? "yes" : "no")};
}

// ---------------------------------------------------------------- 6

Outcome round_trips() {
  Rng rng(606);
  const std::vector<std::string> alphabet{"a", "b", "c", "d", "e", "\xc3\xa9", "\xc3\x9f", "x"};
  auto random_sentence = [&] {
    Sentence s;
    const std::size_t n = rng.index(13);
    for (std::size_t i = 0; i < n; ++i) {
      std::string w;
      const std::size_t len = 1 + rng.index(9);
      for (std::size_t k = 0; k < len; ++k) w += alphabet[rng.index(alphabet.size())];
      s.push_back(w);
    }
    return s;
  };
  std::vector<Sentence> train;
  for (int i = 0; i < 200; ++i) train.push_back(random_sentence());
  auto bpe = data::learn_bpe(data::word_counts(train), 60);
  int bpe_fail = 0;
  for (int i = 0; i < 1000; ++i) {
    auto s = random_sentence();
    if (data::decode_bpe(bpe.apply(s)) != s) ++bpe_fail;
  }
  int tree_fail = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng.index(15));
    depparse::ParsedSentence s;
    s.tree = oracle::random_projective_tree(n, rng, 4);
    for (int i = 0; i < n; ++i) s.tokens.push_back("w" + std::to_string(rng.index(9)));
    if (data::delinearize(data::linearize_tree(s.tokens, s.tree)) != s) ++tree_fail;
  }
  auto hand = data::learn_bpe({{"low", 5}, {"lower", 2}}, 2);
  const bool trace = hand.merges() == std::vector<data::BpeModel::Merge>{{"l", "o"}, {"lo", "w"}} &&
                     hand.apply({"lower", "low"}) == Sentence{"low@@", "e@@", "r", "low"};
  return {bpe_fail == 0 && tree_fail == 0 && trace,
          "BPE " + std::to_string(bpe_fail) + "/1000 failures (" + std::to_string(bpe.merges().size()) +
              " merges); linearization " + std::to_string(tree_fail) + "/500 failures; low/lower trace " +
              (trace ? "matches" : "differs")};
}

// ---------------------------------------------------------------- 7

Outcome tree_gru_batching() {
  ParamTable<double> table;
  Rng init(707);
  syntax::TreeGruParams::create(table, "tree", 4, 3, 0.5, init);
  auto p = syntax::TreeGruParams::bind(table, "tree");
  Rng rng(708);
  NoGradScope<double> ng;
  double worst = 0;
  int trees_done = 0;
  for (int batch = 0; batch < 20; ++batch) {
    std::vector<depparse::DependencyTree> trees;
    std::vector<Eigen::MatrixXd> embs;
    Index total = 0;
    for (int i = 0; i < 10; ++i) {
      const int n = 1 + static_cast<int>(rng.index(12));
      trees.push_back(oracle::random_projective_tree(n, rng));
      embs.push_back(init_uniform<double>({n, 4}, -1, 1, rng).value());
      total += n;
    }
    Eigen::MatrixXd stacked(total, 4);
    Index row = 0;
    for (const auto& e : embs) {
      stacked.middleRows(row, e.rows()) = e;
      row += e.rows();
    }
    auto out = syntax::tree_gru_encode_batch(T::from_matrix(stacked), trees, p).value();
    row = 0;
    for (std::size_t i = 0; i < trees.size(); ++i) {
      auto expected = oracle::naive_tree_gru(embs[i], trees[i].heads, p.bottom_up, p.top_down, p.root.value());
      worst = std::max(worst, (out.middleRows(row, expected.rows()) - expected).cwiseAbs().maxCoeff());
      row += expected.rows();
      ++trees_done;
    }
  }
  return {worst < 1e-5, std::to_string(trees_done) + " random trees (n<=12) in batches of 10; max |diff| = " +
                            fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- 8

Outcome freeze_contract() {
  depparse::BiaffineParser parser(tiny_parser(808), vocab_of(kSrcWords), {"root"});
  TranslationModel m(tiny_model(SyntaxMode::sawr, 808), vocab_of(kSrcWords), vocab_of(kTgtWords), &parser);
  auto snapshot = [&] {
    std::string bytes;
    for (const auto& n : m.parser_param_names()) {
      const auto& v = m.params().get(n).value();
      bytes.append(reinterpret_cast<const char*>(v.data()), static_cast<std::size_t>(v.size()) * sizeof(double));
    }
    return bytes;
  };
  const auto before = snapshot();
  const auto proj_before = m.params().get("sawr.proj.W").value();
  auto batch = m.training_batch({{{"a", "b", "c"}, {}, {}}, {{"d", "e"}, {}, {}}}, {{"x", "y", "z"}, {"w"}});
  seq2seq::Trainer trainer(seq2seq::TrainConfig{1e-2, 5.0, 1});
  seq2seq::set_parser_trainable(m, false);
  for (int i = 0; i < 100; ++i) seq2seq::train_step(m, batch, trainer);
  const bool frozen = snapshot() == before;
  const bool proj_moved = m.params().get("sawr.proj.W").value() != proj_before;

  seq2seq::set_parser_trainable(m, true);
  const auto tuned_before = snapshot();
  const double loss = seq2seq::train_step(m, batch, trainer);
  const bool moved = snapshot() != tuned_before;
  return {frozen && proj_moved && moved,
          std::string("frozen: parser bytes ") + (frozen ? "unchanged" : "CHANGED") + " after 100 updates (projection " +
              (proj_moved ? "trained" : "untouched") + "); tuned: parser bytes " + (moved ? "changed" : "UNCHANGED") +
              " after 1 update (loss " + fmt("%.3f", loss) + ")"};
}

// ---------------------------------------------------------------- 9, 10

struct Workspace {
  fs::path dir;
  std::map<std::string, std::string> nmt;
  std::string parser;
  bool parser_ok = false;
};

Workspace& workspace() {
  static Workspace w = [] {
    Workspace ws;
    ws.dir = fs::temp_directory_path() / "sawr_acceptance";
    fs::remove_all(ws.dir);
    fs::create_directories(ws.dir);
    ws.nmt = cli::parse_document(read_file_bytes("data/toy/nmt.cfg"));
    ws.parser = (ws.dir / "parser.bin").string();
    return ws;
  }();
  return w;
}

int run(const std::string& command, std::map<std::string, std::string> settings,
        const std::map<std::string, std::string>& overrides) {
  std::ostringstream out, err;
  int code = 0;
  try {
    code = cli::run_command(command, cli::validate_config(settings, overrides), out, err);
  } catch (const std::exception& e) {
    err << e.what();
    code = cli::kValidation;
  }
  if (code != cli::kOk) std::cerr << "  " << command << " failed: " << err.str();
  return code;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome overfit_all_modes() {
  auto& ws = workspace();
  auto parser_settings = cli::parse_document(read_file_bytes("data/toy/parser.cfg"));
  ws.parser_ok = run("train-parser", parser_settings, {{"output", ws.parser}}) == cli::kOk;

  const auto refs = data::read_sentences("data/toy/copy.tgt");
  bool pass = ws.parser_ok;
  std::ostringstream os;
  os << "200-pair toy corpus, " << ws.nmt.at("epochs") << " epochs, beam " << 5 << ":";
  for (const char* mode : {"baseline", "sawr", "tree-rnn", "tree-linearized"}) {
    const auto start = Clock::now();
    const auto model = (ws.dir / (std::string(mode) + ".bin")).string();
    const auto hyp = (ws.dir / (std::string(mode) + ".hyp")).string();
    bool ok = run("train-nmt", ws.nmt, {{"mode", mode}, {"parser", ws.parser}, {"model", model}}) == cli::kOk;
    ok = ok && run("translate", {}, {{"model", model}, {"input", "data/toy/copy.src"},
                                     {"input_trees", "data/toy/copy.src.conll"}, {"output", hyp}}) == cli::kOk;
    const double score = ok ? eval::bleu(data::read_sentences(hyp), refs).bleu : 0.0;
    const double elapsed = seconds_since(start);
    pass = pass && ok && score >= 99.0 && elapsed < 900;
    os << ' ' << mode << ' ' << fmt("%.2f", score) << " (" << fmt("%.0f", elapsed) << " s)";
  }
  return {pass, os.str()};
}

Outcome ensemble_reduction() {
  auto& ws = workspace();
  const auto base = (ws.dir / "baseline.bin").string();
  const auto single = (ws.dir / "baseline.hyp").string();
  if (!fs::exists(base) || !fs::exists(single)) return {false, "baseline checkpoint from the overfit run is missing"};
  const auto single_text = read_text(single);
  bool identical = true;
  std::string models = base;
  for (int k = 1; k <= 3; ++k) {
    const auto out = (ws.dir / ("ensemble" + std::to_string(k) + ".hyp")).string();
    const bool ok = run("ensemble-translate", {}, {{"models", models}, {"input", "data/toy/copy.src"},
                                                   {"output", out}}) == cli::kOk;
    identical = identical && ok && read_text(out) == single_text;
    models += "," + base;
  }
  const auto hybrid_out = (ws.dir / "hybrid.hyp").string();
  std::string hybrid;
  for (const char* mode : {"sawr", "tree-rnn", "tree-linearized"}) {
    hybrid += (hybrid.empty() ? "" : ",") + (ws.dir / (std::string(mode) + ".bin")).string();
  }
  const bool hybrid_ok =
      run("ensemble-translate", {}, {{"models", hybrid}, {"input", "data/toy/copy.src"},
                                     {"input_trees", "data/toy/copy.src.conll"}, {"parser", ws.parser},
                                     {"output", hybrid_out}}) == cli::kOk;
  double hybrid_bleu = 0;
  if (hybrid_ok) {
    hybrid_bleu = eval::bleu(data::read_sentences(hybrid_out), data::read_sentences("data/toy/copy.tgt")).bleu;
  }
  return {identical && hybrid_ok,
          std::string("K=1..3 identical checkpoints ") + (identical ? "byte-identical" : "DIFFER") +
              " to single-model beam output; hybrid sawr+tree-rnn+tree-linearized " +
              (hybrid_ok ? "ran, BLEU " + fmt("%.2f", hybrid_bleu) : "FAILED")};
}

// ---------------------------------------------------------------- 11

Outcome significance_sanity() {
  const std::string dir = std::string(SAWR_FIXTURES) + "/bleu/";
  const auto refs = data::read_sentences(dir + "noisy.ref");
  const auto hyps = data::read_sentences(dir + "noisy.hyp");
  const auto same = eval::bootstrap_significance(hyps, hyps, refs, 1000, 11);
  const std::vector<Sentence> empty(refs.size());
  const auto extreme = eval::bootstrap_significance(refs, empty, refs, 1000, 11);
  const auto a = eval::bootstrap_significance(hyps, refs, refs, 1000, 12);
  const auto b = eval::bootstrap_significance(hyps, refs, refs, 1000, 12);
  const bool deterministic = a.p_value == b.p_value && a.wins_a == b.wins_a && a.wins_b == b.wins_b;
  return {same.p_value >= 0.4 && extreme.p_value < 0.01 && deterministic,
          "p(A,A) = " + fmt("%.3f", same.p_value) + "; p(perfect, empty) = " + fmt("%.3f", extreme.p_value) +
              "; fixed seed " + (deterministic ? "deterministic" : "NOT deterministic")};
}

// ---------------------------------------------------------------- 12

Outcome parser_trends() {
  const auto start = Clock::now();
  auto config = cli::validate_config(cli::parse_document(read_file_bytes("data/toy/parser.cfg")), {}).parser_config();
  auto trees_of = [](const std::vector<depparse::ParsedSentence>& bank) {
    std::vector<depparse::DependencyTree> out;
    for (const auto& s : bank) out.push_back(s.tree);
    return out;
  };
  const auto small = depparse::read_treebank("data/toy/treebank_small.conll");
  auto overfit_config = config;
  overfit_config.epochs = 50;
  const auto overfit = depparse::train_parser(small, overfit_config);
  const double train_las = depparse::evaluate_las(overfit.parse_all(small), trees_of(small)).las;

  const auto train = depparse::read_treebank("data/toy/treebank_train.conll");
  const auto dev = depparse::read_treebank("data/toy/treebank_dev.conll");
  std::vector<double> dev_las;
  std::ostringstream os;
  os << "50-sentence treebank training LAS " << fmt("%.2f", 100 * train_las) << "; dev LAS by size:";
  for (std::size_t n : {50, 100, 200, 400}) {
    std::vector<depparse::ParsedSentence> subset(train.begin(), train.begin() + static_cast<long>(n));
    const auto parser = depparse::train_parser(subset, config);
    dev_las.push_back(depparse::evaluate_las(parser.parse_all(dev), trees_of(dev)).las);
    os << ' ' << n << ':' << fmt("%.2f", 100 * dev_las.back());
  }
  const bool monotone = std::is_sorted(dev_las.begin(), dev_las.end());
  os << " (" << fmt("%.0f", seconds_since(start)) << " s)";
  return {train_las >= 0.95 && monotone, os.str()};
}

}  // namespace

int main() {
  fs::current_path(SAWR_SOURCE_DIR);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"attention and output distributions sum to 1", probability_invariants},
      {"projective decoder vs enumeration", eisner_oracle},
      {"beam search vs enumeration, beam 1 vs greedy", beam_oracle},
      {"BLEU vs frozen reference values", bleu_oracle},
      {"BPE and linearization round trips", round_trips},
      {"Tree-GRU level batching vs recursion", tree_gru_batching},
      {"parser freeze contract", freeze_contract},
      {"end-to-end overfit in four modes", overfit_all_modes},
      {"ensemble reduction and hybrid ensemble", ensemble_reduction},
      {"bootstrap significance sanity", significance_sanity},
      {"parser overfit and data-size trend", parser_trends},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << std::setw(2) << i + 1 << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << '/' << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
