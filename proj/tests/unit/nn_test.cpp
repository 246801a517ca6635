#include <gtest/gtest.h>

#include <cmath>

#include "sawr/nn/checkpoint.hpp"
#include "sawr/nn/layers.hpp"
#include "sawr/nn/optim.hpp"
#include "sawr/nn/recurrent.hpp"
#include "sawr/tensor/grad_check.hpp"

using namespace sawr;
using T = Tensor<double>;
using M = MatrixX<double>;

namespace {

ParamTable<double> gru_table(Index in, Index hidden, std::uint64_t seed, double range = 0.5) {
  ParamTable<double> table;
  Rng rng(seed);
  GruParams<double>::create(table, "g", in, hidden, range, rng);
  return table;
}

T random_rows(Index rows, Index cols, Rng& rng) { return init_uniform<double>({rows, cols}, -1, 1, rng); }

// Checks d(sum(w * f(params)))/d(param) for every tensor of the table.
double worst_param_error(ParamTable<double>& table, const std::function<T()>& forward, double eps = 1e-4) {
  double worst = 0;
  for (const auto& name : table.names()) {
    T original = table.get(name);
    auto f = [&](const T& v) {
      table.replace(name, v);
      return forward();
    };
    worst = std::max(worst, grad_check<double>(f, original, eps));
    table.replace(name, original);
  }
  return worst;
}

}  // namespace

TEST(GruStep, ZeroParametersHalveState) {
  auto table = gru_table(3, 4, 1);
  for (const auto& n : table.names()) table.get(n).mutable_value().setZero();
  auto p = GruParams<double>::bind(table, "g");
  Rng rng(2);
  T h = random_rows(1, 4, rng);
  T x = random_rows(1, 3, rng);
  T out = gru_step(x, h, p);
  EXPECT_TRUE(out.value().isApprox(0.5 * h.value()));
  T zero = gru_step(T::zeros({1, 3}), T::zeros({1, 4}), p);
  EXPECT_EQ(zero.value(), M::Zero(1, 4));
}

TEST(GruStep, ShapeErrors) {
  auto table = gru_table(3, 4, 1);
  auto p = GruParams<double>::bind(table, "g");
  EXPECT_THROW(gru_step(T::zeros({1, 2}), T::zeros({1, 4}), p), ShapeError);
  EXPECT_THROW(gru_step(T::zeros({1, 3}), T::zeros({1, 5}), p), ShapeError);
}

TEST(GruStep, GradientCheck) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index in = 1 + static_cast<Index>(rng.index(3));
    const Index hid = 1 + static_cast<Index>(rng.index(3));
    auto table = gru_table(in, hid, 100 + static_cast<std::uint64_t>(trial), 1.0);
    T x = random_rows(2, in, rng);
    T h = random_rows(2, hid, rng);
    T w = random_rows(2, hid, rng);
    auto forward = [&]() { return sum(mul(gru_step(x, h, GruParams<double>::bind(table, "g")), w)); };
    EXPECT_LT(worst_param_error(table, forward), 1e-4);
    auto p = GruParams<double>::bind(table, "g");
    EXPECT_LT(grad_check<double>([&](const T& v) { return sum(mul(gru_step(v, h, p), w)); }, x, 1e-4), 1e-4);
    EXPECT_LT(grad_check<double>([&](const T& v) { return sum(mul(gru_step(x, v, p), w)); }, h, 1e-4), 1e-4);
  }
}

TEST(LstmStep, GradientCheck) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    ParamTable<double> table;
    LstmParams<double>::create(table, "l", 2, 3, 1.0, rng);
    T x = random_rows(2, 2, rng);
    LstmState<double> s{random_rows(2, 3, rng), random_rows(2, 3, rng)};
    T w = random_rows(2, 3, rng);
    T wc = random_rows(2, 3, rng);
    auto forward = [&]() {
      auto next = lstm_step(x, s, LstmParams<double>::bind(table, "l"));
      return add(sum(mul(next.h, w)), sum(mul(next.c, wc)));
    };
    EXPECT_LT(worst_param_error(table, forward), 1e-4);
  }
}

TEST(BiRnn, SinglePositionIsOneStepEachWay) {
  auto table = gru_table(3, 2, 5);
  ParamTable<double> other = gru_table(3, 2, 6);
  GruCell<double> fwd{GruParams<double>::bind(table, "g")};
  GruCell<double> bwd{GruParams<double>::bind(other, "g")};
  Rng rng(7);
  T x = random_rows(1, 3, rng);
  auto out = birnn_encode<double>({x}, fwd, bwd);
  ASSERT_EQ(out.states.size(), 1u);
  M expect(1, 4);
  expect << gru_step(x, T::zeros({1, 2}), fwd.params).value(), gru_step(x, T::zeros({1, 2}), bwd.params).value();
  EXPECT_TRUE(out.states[0].value().isApprox(expect));
}

TEST(BiRnn, ReversalSwapsHalvesWithSharedParams) {
  auto table = gru_table(3, 4, 8);
  GruCell<double> cell{GruParams<double>::bind(table, "g")};
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<T> seq;
    for (int i = 0; i < 6; ++i) seq.push_back(random_rows(1, 3, rng));
    std::vector<T> rev(seq.rbegin(), seq.rend());
    auto a = birnn_encode(seq, cell, cell);
    auto b = birnn_encode(rev, cell, cell);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& ai = a.states[i].value();
      const auto& bi = b.states[seq.size() - 1 - i].value();
      EXPECT_TRUE(ai.leftCols(4).isApprox(bi.rightCols(4), 1e-14));
      EXPECT_TRUE(ai.rightCols(4).isApprox(bi.leftCols(4), 1e-14));
    }
  }
}

TEST(BiRnn, LengthAndDimension) {
  auto table = gru_table(2, 3, 10);
  GruCell<double> cell{GruParams<double>::bind(table, "g")};
  Rng rng(11);
  std::vector<T> seq;
  for (int i = 0; i < 50; ++i) seq.push_back(random_rows(1, 2, rng));
  auto out = birnn_encode(seq, cell, cell);
  ASSERT_EQ(out.states.size(), 50u);
  for (const auto& s : out.states) EXPECT_EQ(s.cols(), 6);
  EXPECT_THROW(birnn_encode(std::vector<T>{}, cell, cell), InvalidArgument);
}

TEST(BiRnn, PaddedBatchMatchesUnbatched) {
  auto table = gru_table(2, 3, 12);
  ParamTable<double> other = gru_table(2, 3, 13);
  GruCell<double> fwd{GruParams<double>::bind(table, "g")};
  GruCell<double> bwd{GruParams<double>::bind(other, "g")};
  Rng rng(14);
  const std::vector<Index> lengths{4, 2, 3};
  std::vector<T> batch;
  for (int t = 0; t < 4; ++t) batch.push_back(random_rows(3, 2, rng));
  auto out = birnn_encode(batch, fwd, bwd, lengths);
  for (Index b = 0; b < 3; ++b) {
    std::vector<T> single;
    for (Index t = 0; t < lengths[b]; ++t) single.push_back(T::from_matrix(batch[t].value().row(b)));
    auto ref = birnn_encode(single, fwd, bwd);
    for (Index t = 0; t < lengths[b]; ++t) {
      EXPECT_TRUE(out.states[t].value().row(b).isApprox(ref.states[t].value().row(0), 1e-14));
    }
    EXPECT_TRUE(out.backward_final.value().row(b).isApprox(ref.backward_final.value(), 1e-14));
    EXPECT_TRUE(out.forward_final.value().row(b).isApprox(ref.forward_final.value(), 1e-14));
  }
}

TEST(BiRnn, GradientCheckLstmAndGru) {
  Rng rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    ParamTable<double> table;
    GruParams<double>::create(table, "f", 2, 2, 1.0, rng);
    LstmParams<double>::create(table, "l", 2, 2, 1.0, rng);
    std::vector<T> seq;
    for (int t = 0; t < 3; ++t) seq.push_back(random_rows(2, 2, rng));
    T w = random_rows(2, 4, rng);
    auto forward = [&]() {
      GruCell<double> g{GruParams<double>::bind(table, "f")};
      LstmCell<double> l{LstmParams<double>::bind(table, "l")};
      auto a = birnn_encode(seq, g, g, {3, 2});
      auto b = birnn_encode(seq, l, l, {1, 3});
      T loss = T::scalar(0);
      for (const auto& s : a.states) loss = add(loss, sum(mul(s, w)));
      for (const auto& s : b.states) loss = add(loss, sum(mul(tanh(s), w)));
      return loss;
    };
    EXPECT_LT(worst_param_error(table, forward), 1e-4);
  }
}

TEST(Linear, IdentityZeroAndHandCase) {
  Rng rng(16);
  T x = random_rows(2, 3, rng);
  T eye = T::from_matrix(M::Identity(3, 3));
  EXPECT_TRUE(linear(x, eye, T::zeros({1, 3})).value().isApprox(x.value()));
  T b = random_rows(1, 3, rng);
  T y = linear(x, T::zeros({3, 3}), b);
  for (Index r = 0; r < 2; ++r) EXPECT_EQ(y.value().row(r), b.value().row(0));

  M w(3, 2);
  w << 1, 2, 0, -1, 3, 1;
  M xv(1, 3);
  xv << 2, 1, -1;
  M bv(1, 2);
  bv << 0.5, -0.5;
  // [2,1,-1] . columns: (2 + 0 - 3) + .5 = -0.5 ; (4 - 1 - 1) - .5 = 1.5
  T out = linear(T::from_matrix(xv), T::from_matrix(w), T::from_matrix(bv));
  EXPECT_DOUBLE_EQ(out.value()(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(out.value()(0, 1), 1.5);
  EXPECT_THROW(linear(T::from_matrix(xv), T::zeros({2, 2}), T::zeros({1, 2})), ShapeError);
}

TEST(Dropout, IdentityCases) {
  Rng rng(17);
  T x = random_rows(4, 5, rng);
  EXPECT_EQ(dropout(x, 0.0, Mode::train, rng).value(), x.value());
  EXPECT_EQ(dropout(x, 0.9, Mode::eval, rng).value(), x.value());
  EXPECT_THROW(dropout(x, 1.0, Mode::train, rng), InvalidArgument);
  EXPECT_THROW(dropout(x, -0.1, Mode::eval, rng), InvalidArgument);
}

TEST(Dropout, ZeroFractionAndExpectation) {
  Rng rng(18);
  T x = T::from_matrix(M::Constant(1000, 1000, 2.0));
  T y = dropout(x, 0.5, Mode::train, rng);
  const double zero_fraction = (y.value().array() == 0.0).cast<double>().mean();
  EXPECT_NEAR(zero_fraction, 0.5, 0.01);
  EXPECT_NEAR(y.value().mean(), 2.0, 0.01);
  for (Index i = 0; i < 100; ++i) {
    const double v = y.value().data()[i];
    EXPECT_TRUE(v == 0.0 || v == 4.0);
  }
}

TEST(ClipGradients, Examples) {
  ParamTable<double> t;
  t.add("a", T::zeros({2}));
  t.get("a").grad_buffer() << 3, 4;
  EXPECT_DOUBLE_EQ(clip_gradients(t, 5.0), 5.0);
  EXPECT_EQ(t.get("a").grad(), (M(1, 2) << 3, 4).finished());

  t.get("a").grad_buffer() << 6, 8;
  EXPECT_DOUBLE_EQ(clip_gradients(t, 5.0), 10.0);
  EXPECT_TRUE(t.get("a").grad().isApprox((M(1, 2) << 3, 4).finished()));

  t.get("a").grad_buffer() << 1.5, 2;  // norm 2.5
  clip_gradients(t, 5.0);
  EXPECT_EQ(t.get("a").grad(), (M(1, 2) << 1.5, 2).finished());
}

TEST(ClipGradients, NeverIncreasesAndIdempotent) {
  Rng rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    ParamTable<double> t;
    t.add("a", T::zeros({2, 3}));
    t.add("b", T::zeros({4}));
    t.get("a").grad_buffer() = random_rows(2, 3, rng).value() * rng.uniform(0, 10);
    t.get("b").grad_buffer() = random_rows(1, 4, rng).value() * rng.uniform(0, 10);
    const double before = global_grad_norm(t);
    const double threshold = rng.uniform(0.1, 10);
    clip_gradients(t, threshold);
    const double after = global_grad_norm(t);
    EXPECT_LE(after, before + 1e-12);
    const M a1 = t.get("a").grad();
    clip_gradients(t, threshold);
    EXPECT_TRUE(t.get("a").grad().isApprox(a1, 1e-12));
  }
}

TEST(Adam, ZeroGradientLeavesParams) {
  ParamTable<double> t;
  t.add("p", T::vector({1.0, -2.0}));
  t.get("p").grad_buffer().setZero();
  AdamState<double> state;
  adam_step(t, state, 5e-4);
  EXPECT_EQ(state.step, 1);
  EXPECT_EQ(t.get("p").value(), (M(1, 2) << 1.0, -2.0).finished());
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  ParamTable<double> t;
  t.add("p", T::vector({0.0, 0.0, 0.0}));
  t.get("p").grad_buffer() << 0.3, -7.0, 1e-3;
  AdamState<double> state;
  adam_step(t, state, 0.01);
  const M& v = t.get("p").value();
  EXPECT_NEAR(v(0, 0), -0.01, 1e-8);
  EXPECT_NEAR(v(0, 1), 0.01, 1e-8);
  EXPECT_NEAR(v(0, 2), -0.01, 1e-6);
}

TEST(Adam, TwoStepHandTrace) {
  // g = 0.5 twice, lr = 0.1: m = 0.05 then 0.095, v = 2.5e-4 then
  // 4.9975e-4; both bias-corrected ratios are 0.5/sqrt(0.25) = 1.
  ParamTable<double> t;
  t.add("p", T::scalar(1.0));
  AdamState<double> state;
  for (int i = 0; i < 2; ++i) {
    t.get("p").grad_buffer()(0, 0) = 0.5;
    adam_step(t, state, 0.1);
    t.get("p").clear_grad();
  }
  EXPECT_NEAR(state.first_moment["p"](0, 0), 0.095, 1e-15);
  EXPECT_NEAR(state.second_moment["p"](0, 0), 4.9975e-4, 1e-15);
  EXPECT_NEAR(t.get("p").value()(0, 0), 0.8, 1e-7);
}

TEST(Adam, FrozenParametersUntouched) {
  ParamTable<double> t;
  t.add("a", T::scalar(1.0));
  t.add("b", T::scalar(1.0));
  t.get("a").grad_buffer()(0, 0) = 1;
  t.get("b").grad_buffer()(0, 0) = 1;
  AdamState<double> state;
  adam_step(t, state, 0.1, {"b"});
  EXPECT_NE(t.get("a").value()(0, 0), 1.0);
  EXPECT_EQ(t.get("b").value()(0, 0), 1.0);
}

TEST(Checkpoint, RoundTripAndMagic) {
  ParamTable<double> t;
  Rng rng(20);
  t.add_uniform("x.W", {3, 2}, 1.0, rng);
  t.add_uniform("x.b", {4}, 1.0, rng);
  Metadata meta{{"mode", "sawr"}, {"vocab", "a\nb\nc"}};
  std::string bytes = serialize_params(t, meta);
  EXPECT_EQ(bytes.substr(0, 8), "SAWRCKPT");
  auto ck = deserialize_checkpoint<double>(bytes);
  ASSERT_EQ(ck.tensors.size(), 2u);
  EXPECT_EQ(ck.tensors[0].first, "x.W");
  EXPECT_EQ(ck.tensors[0].second.value(), t.get("x.W").value());
  EXPECT_EQ(ck.tensors[1].second.shape(), (Shape{4}));
  EXPECT_EQ(ck.meta, meta);

  ParamTable<double> fresh;
  fresh.add("x.W", T::zeros({3, 2}));
  fresh.add("x.b", T::zeros({4}));
  load_into(fresh, ck);
  EXPECT_EQ(serialize_params(fresh, meta), bytes);

  bytes[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint<double>(bytes), DataError);
  EXPECT_THROW(deserialize_checkpoint<double>("SAWRCKPT"), DataError);
}

TEST(Checkpoint, SinglePrecisionTag) {
  ParamTable<float> t;
  Rng rng(21);
  t.add_uniform("w", {2, 2}, 1.0, rng);
  auto bytes = serialize_params(t);
  auto as_double = deserialize_checkpoint<double>(bytes);
  EXPECT_FLOAT_EQ(static_cast<float>(as_double.tensors[0].second.value()(1, 1)), t.get("w").value()(1, 1));
}
