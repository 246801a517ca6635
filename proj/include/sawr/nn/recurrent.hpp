#pragma once

#include <string>
#include <vector>

#include "sawr/nn/params.hpp"
#include "sawr/tensor/ops.hpp"

namespace sawr {

/// GRU weights. Inputs are row vectors, so W is [in,hidden], U is
/// [hidden,hidden] and biases are [1,hidden].
///
///   z  = sigmoid(x Wz + h Uz + bz)               update gate
///   r  = sigmoid(x Wr + h Ur + br)               reset gate
///   h~ = tanh(x Wh + bh + r * (h Uh))            candidate
///   h' = (1 - z) * h + z * h~
template <typename Scalar>
struct GruParams {
  Tensor<Scalar> Wz, Uz, bz;
  Tensor<Scalar> Wr, Ur, br;
  Tensor<Scalar> Wh, Uh, bh;

  static void create(ParamTable<Scalar>& table, const std::string& prefix, Index in, Index hidden, double range,
                     Rng& rng) {
    for (const char* gate : {".update", ".reset", ".candidate"}) {
      table.add_uniform(prefix + gate + ".W", {in, hidden}, range, rng);
      table.add_uniform(prefix + gate + ".U", {hidden, hidden}, range, rng);
      table.add_uniform(prefix + gate + ".b", {1, hidden}, range, rng);
    }
  }

  static GruParams bind(const ParamTable<Scalar>& t, const std::string& p) {
    GruParams g{t.get(p + ".update.W"),    t.get(p + ".update.U"),    t.get(p + ".update.b"),
                t.get(p + ".reset.W"),     t.get(p + ".reset.U"),     t.get(p + ".reset.b"),
                t.get(p + ".candidate.W"), t.get(p + ".candidate.U"), t.get(p + ".candidate.b")};
    g.validate();
    return g;
  }

  Index input_dim() const { return Wz.rows(); }
  Index hidden_dim() const { return Uz.rows(); }

  void validate() const {
    const Index in = Wz.rows();
    const Index h = Uz.rows();
    for (const auto* w : {&Wz, &Wr, &Wh}) {
      if (w->rows() != in || w->cols() != h) throw ShapeError("GruParams: inconsistent input weights");
    }
    for (const auto* u : {&Uz, &Ur, &Uh}) {
      if (u->rows() != h || u->cols() != h) throw ShapeError("GruParams: inconsistent recurrent weights");
    }
    for (const auto* b : {&bz, &br, &bh}) {
      if (b->rows() != 1 || b->cols() != h) throw ShapeError("GruParams: inconsistent biases");
    }
  }
};

template <typename Scalar>
Tensor<Scalar> gru_step(const Tensor<Scalar>& x, const Tensor<Scalar>& h, const GruParams<Scalar>& p) {
  if (x.rank() != 2 || x.cols() != p.input_dim()) throw ShapeError("gru_step: input dim mismatch");
  if (h.rank() != 2 || h.cols() != p.hidden_dim() || h.rows() != x.rows()) {
    throw ShapeError("gru_step: hidden dim mismatch");
  }
  auto z = sigmoid(add(add(matmul(x, p.Wz), matmul(h, p.Uz)), p.bz));
  auto r = sigmoid(add(add(matmul(x, p.Wr), matmul(h, p.Ur)), p.br));
  auto cand = tanh(add(add(matmul(x, p.Wh), p.bh), mul(r, matmul(h, p.Uh))));
  return add(h, mul(z, sub(cand, h)));
}

/// LSTM weights, same row-vector layout as GruParams.
///
///   i = sigmoid(x Wi + h Ui + bi)   f = sigmoid(x Wf + h Uf + bf)
///   o = sigmoid(x Wo + h Uo + bo)   g = tanh(x Wg + h Ug + bg)
///   c' = f * c + i * g              h' = o * tanh(c')
template <typename Scalar>
struct LstmParams {
  Tensor<Scalar> Wi, Ui, bi;
  Tensor<Scalar> Wf, Uf, bf;
  Tensor<Scalar> Wo, Uo, bo;
  Tensor<Scalar> Wg, Ug, bg;

  static void create(ParamTable<Scalar>& table, const std::string& prefix, Index in, Index hidden, double range,
                     Rng& rng) {
    for (const char* gate : {".input", ".forget", ".output", ".cell"}) {
      table.add_uniform(prefix + gate + ".W", {in, hidden}, range, rng);
      table.add_uniform(prefix + gate + ".U", {hidden, hidden}, range, rng);
      table.add_uniform(prefix + gate + ".b", {1, hidden}, range, rng);
    }
  }

  static LstmParams bind(const ParamTable<Scalar>& t, const std::string& p) {
    return {t.get(p + ".input.W"),  t.get(p + ".input.U"),  t.get(p + ".input.b"),
            t.get(p + ".forget.W"), t.get(p + ".forget.U"), t.get(p + ".forget.b"),
            t.get(p + ".output.W"), t.get(p + ".output.U"), t.get(p + ".output.b"),
            t.get(p + ".cell.W"),   t.get(p + ".cell.U"),   t.get(p + ".cell.b")};
  }

  Index input_dim() const { return Wi.rows(); }
  Index hidden_dim() const { return Ui.rows(); }
};

template <typename Scalar>
struct LstmState {
  Tensor<Scalar> h;
  Tensor<Scalar> c;
};

template <typename Scalar>
LstmState<Scalar> lstm_step(const Tensor<Scalar>& x, const LstmState<Scalar>& s, const LstmParams<Scalar>& p) {
  if (x.rank() != 2 || x.cols() != p.input_dim()) throw ShapeError("lstm_step: input dim mismatch");
  if (s.h.cols() != p.hidden_dim() || s.h.rows() != x.rows()) throw ShapeError("lstm_step: hidden dim mismatch");
  auto gate = [&](const Tensor<Scalar>& W, const Tensor<Scalar>& U, const Tensor<Scalar>& b) {
    return add(add(matmul(x, W), matmul(s.h, U)), b);
  };
  auto i = sigmoid(gate(p.Wi, p.Ui, p.bi));
  auto f = sigmoid(gate(p.Wf, p.Uf, p.bf));
  auto o = sigmoid(gate(p.Wo, p.Uo, p.bo));
  auto g = tanh(gate(p.Wg, p.Ug, p.bg));
  auto c = add(mul(f, s.c), mul(i, g));
  return {mul(o, tanh(c)), c};
}

/// Adapters giving GRU and LSTM a common interface for birnn_encode.
template <typename Scalar>
struct GruCell {
  using State = Tensor<Scalar>;
  GruParams<Scalar> params;

  Index hidden_dim() const { return params.hidden_dim(); }
  State initial(Index batch) const { return Tensor<Scalar>::zeros({batch, hidden_dim()}); }
  State step(const Tensor<Scalar>& x, const State& s) const { return gru_step(x, s, params); }
  static const Tensor<Scalar>& output(const State& s) { return s; }
  static State keep(const std::vector<bool>& mask, const State& fresh, const State& old) {
    return blend_rows(mask, fresh, old);
  }
};

template <typename Scalar>
struct LstmCell {
  using State = LstmState<Scalar>;
  LstmParams<Scalar> params;

  Index hidden_dim() const { return params.hidden_dim(); }
  State initial(Index batch) const {
    return {Tensor<Scalar>::zeros({batch, hidden_dim()}), Tensor<Scalar>::zeros({batch, hidden_dim()})};
  }
  State step(const Tensor<Scalar>& x, const State& s) const { return lstm_step(x, s, params); }
  static const Tensor<Scalar>& output(const State& s) { return s.h; }
  static State keep(const std::vector<bool>& mask, const State& fresh, const State& old) {
    return {blend_rows(mask, fresh.h, old.h), blend_rows(mask, fresh.c, old.c)};
  }
};

template <typename Scalar>
struct BiRnnOutput {
  /// One [B, 2*hidden] tensor per position: forward state (+) backward state.
  std::vector<Tensor<Scalar>> states;
  /// Forward state after each row's last real token, [B,hidden].
  Tensor<Scalar> forward_final;
  /// Backward state at position 0 (it has read the whole row), [B,hidden].
  Tensor<Scalar> backward_final;
};

/// Bidirectional recurrent encoding of a batch of sequences.
///
/// `inputs` holds one [B,in] tensor per position. When `lengths` is given,
/// row b only has lengths[b] real positions: forward states are frozen past
/// the end and backward states stay at their initial value until the last
/// real token, so padding never leaks into real positions.
template <typename Scalar, typename Cell>
BiRnnOutput<Scalar> birnn_encode(const std::vector<Tensor<Scalar>>& inputs, const Cell& fwd, const Cell& bwd,
                                 const std::vector<Index>& lengths = {}) {
  if (inputs.empty()) throw InvalidArgument("birnn_encode: empty input sequence");
  const Index steps = static_cast<Index>(inputs.size());
  const Index batch = inputs.front().rows();
  if (!lengths.empty() && static_cast<Index>(lengths.size()) != batch) {
    throw ShapeError("birnn_encode: lengths size must equal batch size");
  }
  auto mask_at = [&](Index t) {
    std::vector<bool> m(static_cast<std::size_t>(batch), true);
    if (!lengths.empty()) {
      for (Index b = 0; b < batch; ++b) m[static_cast<std::size_t>(b)] = t < lengths[static_cast<std::size_t>(b)];
    }
    return m;
  };
  const bool ragged = !lengths.empty() &&
                      std::any_of(lengths.begin(), lengths.end(), [&](Index l) { return l != steps; });

  std::vector<Tensor<Scalar>> forward(static_cast<std::size_t>(steps));
  auto state = fwd.initial(batch);
  for (Index t = 0; t < steps; ++t) {
    auto next = fwd.step(inputs[static_cast<std::size_t>(t)], state);
    state = ragged ? Cell::keep(mask_at(t), next, state) : next;
    forward[static_cast<std::size_t>(t)] = Cell::output(state);
  }
  Tensor<Scalar> forward_final = Cell::output(state);

  std::vector<Tensor<Scalar>> backward(static_cast<std::size_t>(steps));
  state = bwd.initial(batch);
  for (Index t = steps - 1; t >= 0; --t) {
    auto next = bwd.step(inputs[static_cast<std::size_t>(t)], state);
    state = ragged ? Cell::keep(mask_at(t), next, state) : next;
    backward[static_cast<std::size_t>(t)] = Cell::output(state);
  }

  BiRnnOutput<Scalar> out;
  out.states.reserve(static_cast<std::size_t>(steps));
  for (Index t = 0; t < steps; ++t) {
    out.states.push_back(concat<Scalar>({forward[static_cast<std::size_t>(t)], backward[static_cast<std::size_t>(t)]}, 1));
  }
  out.forward_final = forward_final;
  out.backward_final = backward.front();
  return out;
}

}  // namespace sawr
