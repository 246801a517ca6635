#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include "oracles.hpp"
#include "sawr/depparse/eisner.hpp"
#include "sawr/depparse/metrics.hpp"
#include "sawr/depparse/parser.hpp"
#include "sawr/depparse/treebank.hpp"
#include "sawr/errors.hpp"
#include "sawr/tensor/ops.hpp"

using namespace sawr;
using namespace sawr::depparse;

namespace {

using oracle::Key;
using oracle::random_scores;
using oracle::tie_key;

ParserConfig tiny_config() {
  ParserConfig c;
  c.embed_dim = 4;
  c.hidden_dim = 3;
  c.layers = 2;
  c.arc_dim = 3;
  c.label_dim = 2;
  c.init_range = 0.5;
  c.min_freq = 1;
  return c;
}

data::Vocabulary small_vocab() {
  data::Vocabulary v;
  for (const char* w : {"the", "dog", "barks", "loudly", "a", "cat"}) v.add(w);
  return v;
}

}  // namespace

TEST(Treebank, MinimalTwoTokenSentence) {
  std::istringstream in("1\ta\t2\tdet\n2\tb\t0\troot\n");
  auto sents = read_treebank(in);
  ASSERT_EQ(sents.size(), 1u);
  EXPECT_EQ(sents[0].tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(sents[0].tree.heads, (std::vector<int>{2, 0}));
}

TEST(Treebank, TenColumnWithCommentsAndMultiwordLines) {
  std::istringstream in(
      "# sent_id = 1\n"
      "1-2\tdont\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tdo\tdo\tAUX\tAUX\t_\t2\taux\t_\t_\n"
      "2\tnot\tnot\tPART\tPART\t_\t0\troot\t_\t_\n"
      "\n"
      "1\tyes\tyes\tX\tX\t_\t0\troot\t_\t_\n");
  auto sents = read_treebank(in);
  ASSERT_EQ(sents.size(), 2u);
  EXPECT_EQ(sents[0].tokens, (std::vector<std::string>{"do", "not"}));
  EXPECT_EQ(sents[0].tree.labels, (std::vector<std::string>{"aux", "root"}));
  EXPECT_EQ(sents[1].tree.heads, (std::vector<int>{0}));
}

TEST(Treebank, HeadOutOfRangeIsDataError) {
  std::istringstream in("1\ta\t0\troot\n\n1\ta\t3\tdep\n2\tb\t0\troot\n");
  try {
    read_treebank(in);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("sentence 1"), std::string::npos);
  }
}

TEST(Treebank, CycleIsDataError) {
  std::istringstream in("1\ta\t2\tdep\n2\tb\t1\tdep\n3\tc\t0\troot\n");
  EXPECT_THROW(read_treebank(in), DataError);
}

TEST(Treebank, MissingColumnsIsParseErrorWithLine) {
  std::istringstream in("1\ta\t0\troot\n\n1\ta\t0\n");
  try {
    read_treebank(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Treebank, ExtraRootsAttachToFirstRoot) {
  std::istringstream in("1\ta\t0\troot\n2\tb\t0\troot\n");
  auto sents = read_treebank(in);
  EXPECT_EQ(sents[0].tree.heads, (std::vector<int>{0, 1}));
}

TEST(Treebank, RoundTripFiftySentences) {
  Rng rng(11);
  std::vector<ParsedSentence> sample;
  for (int s = 0; s < 50; ++s) {
    const int n = 1 + static_cast<int>(rng.index(12));
    ParsedSentence p;
    p.tree = oracle::random_projective_tree(n, rng);
    for (int i = 0; i < n; ++i) p.tokens.push_back("w" + std::to_string(rng.index(30)));
    sample.push_back(p);
  }
  for (auto format : {TreebankFormat::conll10, TreebankFormat::conll4}) {
    std::stringstream buf;
    write_treebank(buf, sample, format);
    EXPECT_EQ(read_treebank(buf), sample);
  }
}

TEST(Tree, ProjectivityAndValidity) {
  EXPECT_TRUE(is_projective({{2, 0, 2}, {}}));
  EXPECT_FALSE(is_projective({{3, 4, 0, 3}, {}}));  // 1<-3 crosses 2<-4
  EXPECT_FALSE(is_valid_tree({{0, 0}, {}}));
  EXPECT_FALSE(is_valid_tree({{2, 1}, {}}));
  EXPECT_TRUE(is_valid_tree({{0}, {}}));
}

TEST(Tree, ProjectivizeLiftsUntilProjective) {
  Rng rng(5);
  int lifted = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.index(9));
    DependencyTree t;
    // Random tree: attach each token in a random order to an earlier-attached node.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
    rng.shuffle(order);
    t.heads.assign(static_cast<std::size_t>(n), 0);
    for (int k = 1; k < n; ++k) {
      t.heads[static_cast<std::size_t>(order[static_cast<std::size_t>(k)] - 1)] =
          order[rng.index(static_cast<std::uint64_t>(k))];
    }
    ASSERT_TRUE(is_valid_tree(t));
    auto p = projectivize(t);
    EXPECT_TRUE(is_valid_tree(p));
    EXPECT_TRUE(is_projective(p));
    if (is_projective(t)) {
      EXPECT_EQ(p, t);
    }
    lifted += p != t;
  }
  EXPECT_GT(lifted, 0);
}

TEST(Eisner, SingleTokenIsForcedRoot) {
  ArcScores s;
  s.arcs.resize(2, 1);
  s.arcs << 0.3, -std::numeric_limits<double>::infinity();
  EXPECT_EQ(decode_projective(s).heads, (std::vector<int>{0}));
}

TEST(Eisner, EmptyAndNonFiniteRejected) {
  ArcScores empty;
  empty.arcs.resize(1, 0);
  EXPECT_THROW(decode_projective(empty), InvalidArgument);
  Rng rng(1);
  auto s = random_scores(3, rng);
  s.arcs(0, 1) = std::nan("");
  EXPECT_THROW(decode_projective(s), InvalidArgument);
}

TEST(Eisner, MatchesExhaustiveEnumeration) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 6;
    auto s = random_scores(n, rng);
    auto tree = decode_projective(s);
    ASSERT_TRUE(is_valid_tree(tree));
    ASSERT_TRUE(is_projective(tree));
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_heads;
    for (const auto& heads : oracle::all_projective_trees(n)) {
      const double v = tree_score(s, {heads, {}});
      if (v > best) {
        best = v;
        best_heads = heads;
      }
    }
    EXPECT_NEAR(tree_score(s, tree), best, 1e-9);
    EXPECT_EQ(tree.heads, best_heads);
  }
}

TEST(Eisner, TieBreakMatchesEnumerationOnIntegerScores) {
  Rng rng(7);
  int unique_cases = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    auto s = random_scores(n, rng, true);
    auto tree = decode_projective(s);
    Key best{-1e300, 0, 0};
    std::vector<std::vector<int>> winners;
    for (const auto& heads : oracle::all_projective_trees(n)) {
      Key k = tie_key(s, heads);
      if (k > best) {
        best = k;
        winners = {heads};
      } else if (k == best) {
        winners.push_back(heads);
      }
    }
    EXPECT_EQ(tie_key(s, tree.heads), best);
    if (winners.size() == 1) {
      ++unique_cases;
      EXPECT_EQ(tree.heads, winners.front());
    }
  }
  EXPECT_GT(unique_cases, 50);
}

TEST(Eisner, AllEqualScoresGiveCanonicalStar) {
  for (int n = 1; n <= 7; ++n) {
    ArcScores s;
    s.arcs = Eigen::MatrixXd::Zero(n + 1, n);
    for (int d = 1; d <= n; ++d) s.arcs(d, d - 1) = -std::numeric_limits<double>::infinity();
    auto tree = decode_projective(s);
    std::vector<int> expected(static_cast<std::size_t>(n), 1);
    expected[0] = 0;
    EXPECT_EQ(tree.heads, expected);
  }
}

TEST(Eisner, LabelsAreArcArgmax) {
  Rng rng(3);
  auto s = random_scores(4, rng);
  s.label_names = {"a", "b"};
  s.labels = {Eigen::MatrixXd::Zero(5, 4), Eigen::MatrixXd::Zero(5, 4)};
  auto tree = decode_projective(s);
  const int h3 = tree.heads[2];
  s.labels[1](h3, 2) = 1.0;
  auto labeled = decode_projective(s);
  EXPECT_EQ(labeled.labels, (std::vector<std::string>{"a", "a", "b", "a"}));
}

TEST(Metrics, HandCases) {
  DependencyTree gold{{2, 0, 2}, {"det", "root", "obj"}};
  EXPECT_DOUBLE_EQ(evaluate_las({gold}, {gold}).las, 1.0);
  DependencyTree relabeled{{2, 0, 2}, {"x", "y", "z"}};
  auto r = evaluate_las({relabeled}, {gold});
  EXPECT_DOUBLE_EQ(r.uas, 1.0);
  EXPECT_DOUBLE_EQ(r.las, 0.0);

  // 10 tokens: 7 correct heads, 5 of them with correct labels.
  DependencyTree g10{{2, 0, 2, 3, 4, 5, 6, 7, 8, 9}, std::vector<std::string>(10, "dep")};
  DependencyTree p10 = g10;
  p10.heads[7] = 1;
  p10.heads[8] = 1;
  p10.heads[9] = 1;
  p10.labels[0] = "bad";
  p10.labels[2] = "bad";
  auto hand = evaluate_las({p10}, {g10});
  EXPECT_DOUBLE_EQ(hand.uas, 0.7);
  EXPECT_DOUBLE_EQ(hand.las, 0.5);
  EXPECT_THROW(evaluate_las({gold}, {}), InvalidArgument);
}

TEST(Parser, EncodingShapeAndDeterminism) {
  BiaffineParser parser(tiny_config(), small_vocab(), {"root", "dep"});
  std::vector<std::string> six{"the", "dog", "barks", "loudly", "a", "cat"};
  auto o = parser.encode(six);
  EXPECT_EQ(o.rows(), 6);
  EXPECT_EQ(o.cols(), parser.config().encoding_dim());
  EXPECT_EQ(o.value(), parser.encode(six).value());
  auto unk = parser.encode({"zz", "yy", "xx"});
  EXPECT_TRUE(unk.value().allFinite());
  EXPECT_THROW(parser.encode({}), InvalidArgument);
}

TEST(Parser, BatchEncodingMatchesSingleSentence) {
  BiaffineParser parser(tiny_config(), small_vocab(), {"root"});
  auto enc = parser.encoder();
  std::vector<std::vector<data::TokenId>> batch{parser.ids({"the", "dog"}), parser.ids({"a", "cat", "barks", "loudly"})};
  auto states = enc.encode_batch(batch);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    auto rows = sentence_rows(states, static_cast<Index>(b), static_cast<Index>(batch[b].size()));
    EXPECT_TRUE(rows.value().isApprox(enc.encode(batch[b]).value(), 1e-12));
  }
}

TEST(Parser, ZeroParametersStillDecodeValidTree) {
  BiaffineParser parser(tiny_config(), small_vocab(), {"root", "dep"});
  for (const auto& n : parser.params().names()) parser.params().get(n).mutable_value().setZero();
  std::vector<std::string> six{"the", "dog", "barks", "loudly", "a", "cat"};
  auto scores = parser.score_arcs(parser.encode(six));
  EXPECT_EQ(scores.arcs.rows(), 7);
  EXPECT_EQ(scores.arcs.cols(), 6);
  auto tree = parser.parse(six);
  EXPECT_TRUE(is_valid_tree(tree));
  EXPECT_TRUE(is_projective(tree));
  EXPECT_EQ(tree.heads, (std::vector<int>{0, 1, 1, 1, 1, 1}));
}

TEST(Parser, ScorerAndTreeLossGradientCheck) {
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    auto config = tiny_config();
    config.seed = 100 + static_cast<std::uint64_t>(trial);
    BiaffineParser parser(config, small_vocab(), {"root", "dep", "obj"});
    const int n = 3 + trial;
    auto gold = oracle::random_projective_tree(n, rng);
    for (auto& l : gold.labels) l = l == "l0" ? "root" : (l == "l1" ? "dep" : "obj");
    auto encoding = init_uniform<double>({n, config.encoding_dim()}, -1, 1, rng);
    auto forward = [&] { return parser.tree_loss(encoding, gold); };
    auto scorer = parser.params().names_with_prefix("parser.scorer.");
    EXPECT_LT(oracle::worst_param_error(parser.params(), forward, 1e-4, scorer), 1e-4);
    EXPECT_LT(grad_check<double>([&](const Tensor<double>& e) { return parser.tree_loss(e, gold); }, encoding, 1e-4),
              1e-4);
  }
}

TEST(Parser, OneStepReducesLoss) {
  std::istringstream in(
      "1\tthe\t2\tdet\n2\tdog\t3\tnsubj\n3\tbarks\t0\troot\n\n"
      "1\ta\t2\tdet\n2\tcat\t0\troot\n");
  auto bank = read_treebank(in);
  auto config = tiny_config();
  config.epochs = 0;
  auto parser = train_parser(bank, config);
  double before = 0;
  {
    NoGradScope<double> ng;
    before = parser.loss(bank).item();
  }
  config.epochs = 1;
  config.batch_size = 8;
  config.learning_rate = 1e-2;
  auto trained = train_parser(bank, config);
  NoGradScope<double> ng;
  EXPECT_LT(trained.loss(bank).item(), before);
}

TEST(Parser, CheckpointRoundTrip) {
  BiaffineParser parser(tiny_config(), small_vocab(), {"root", "dep"});
  auto restored = BiaffineParser::deserialize(parser.serialize());
  std::vector<std::string> s{"the", "cat", "barks"};
  EXPECT_EQ(restored.encode(s).value(), parser.encode(s).value());
  EXPECT_EQ(restored.parse(s), parser.parse(s));
  EXPECT_EQ(restored.labels(), parser.labels());
  EXPECT_THROW(train_parser({}, tiny_config()), InvalidArgument);
}
