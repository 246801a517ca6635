#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sawr/tensor/tensor.hpp"

// Differentiable primitives. Every function computes its value eagerly and,
// when a tape is active and some input requires a gradient, records a
// backward closure on that tape.

namespace sawr {

namespace detail {

template <typename Scalar>
bool should_record(const std::vector<Tensor<Scalar>>& inputs) {
  if (active_tape<Scalar>() == nullptr) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor<Scalar>& t) { return t.requires_grad(); });
}

template <typename Scalar, typename BackwardFn>
Tensor<Scalar> make_result(Shape shape, MatrixX<Scalar> value,
                           const std::vector<Tensor<Scalar>>& inputs, BackwardFn&& backward) {
  const bool record = should_record(inputs);
  Tensor<Scalar> out(std::move(shape), std::move(value), record);
  if (record) active_tape<Scalar>()->record(out, inputs, std::forward<BackwardFn>(backward));
  return out;
}

template <typename Scalar, typename Expr>
void accumulate(Tensor<Scalar> t, const Expr& delta) {
  if (t.requires_grad()) t.grad_buffer() += delta;
}

inline Index storage_axis(Index rank, Index axis, const char* op) {
  if (axis < 0 || axis >= rank) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(rank));
  }
  // rank-1 tensors are stored as rows, so their only axis is the column axis
  return rank == 1 ? 1 : axis;
}

template <typename Scalar>
void require_rank2(const Tensor<Scalar>& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected rank-2 tensor, got " + shape_string(t.shape()));
}

enum class Broadcast { none, bias_row };

template <typename Scalar>
Broadcast binary_broadcast(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::none;
  if (a.rank() == 2 && b.rank() == 2 && b.rows() == 1 && b.cols() == a.cols()) return Broadcast::bias_row;
  throw ShapeError(std::string(op) + ": cannot combine " + shape_string(a.shape()) + " and " +
                   shape_string(b.shape()));
}

}  // namespace detail

/// [m,k] x [k,n] -> [m,n]
template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  detail::require_rank2(a, "matmul");
  detail::require_rank2(b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                     shape_string(b.shape()));
  }
  MatrixX<Scalar> v = a.value() * b.value();
  return detail::make_result<Scalar>({a.rows(), b.cols()}, std::move(v), {a, b},
                                     [a, b](const MatrixX<Scalar>& g) {
                                       if (a.requires_grad()) detail::accumulate(a, g * b.value().transpose());
                                       if (b.requires_grad()) detail::accumulate(b, a.value().transpose() * g);
                                     });
}

template <typename Scalar>
Tensor<Scalar> transpose(const Tensor<Scalar>& a) {
  detail::require_rank2(a, "transpose");
  MatrixX<Scalar> v = a.value().transpose();
  return detail::make_result<Scalar>({a.cols(), a.rows()}, std::move(v), {a},
                                     [a](const MatrixX<Scalar>& g) { detail::accumulate(a, g.transpose()); });
}

/// Elementwise a + b; b may be a [1,n] bias row broadcast over a's rows.
template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  auto mode = detail::binary_broadcast(a, b, "add");
  MatrixX<Scalar> v = mode == detail::Broadcast::none ? MatrixX<Scalar>(a.value() + b.value())
                                                      : MatrixX<Scalar>(a.value().rowwise() + b.value().row(0));
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a, b}, [a, b, mode](const MatrixX<Scalar>& g) {
    detail::accumulate(a, g);
    if (mode == detail::Broadcast::none) {
      detail::accumulate(b, g);
    } else {
      detail::accumulate(b, g.colwise().sum());
    }
  });
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  auto mode = detail::binary_broadcast(a, b, "sub");
  MatrixX<Scalar> v = mode == detail::Broadcast::none ? MatrixX<Scalar>(a.value() - b.value())
                                                      : MatrixX<Scalar>(a.value().rowwise() - b.value().row(0));
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a, b}, [a, b, mode](const MatrixX<Scalar>& g) {
    detail::accumulate(a, g);
    if (mode == detail::Broadcast::none) {
      detail::accumulate(b, -g);
    } else {
      detail::accumulate(b, -g.colwise().sum());
    }
  });
}

/// Elementwise (Hadamard) product.
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  auto mode = detail::binary_broadcast(a, b, "mul");
  MatrixX<Scalar> bv = mode == detail::Broadcast::none ? b.value() : MatrixX<Scalar>(b.value().replicate(a.rows(), 1));
  MatrixX<Scalar> v = a.value().cwiseProduct(bv);
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a, b}, [a, b, mode, bv](const MatrixX<Scalar>& g) {
    if (a.requires_grad()) detail::accumulate(a, g.cwiseProduct(bv));
    if (b.requires_grad()) {
      MatrixX<Scalar> gb = g.cwiseProduct(a.value());
      if (mode == detail::Broadcast::none) {
        detail::accumulate(b, gb);
      } else {
        detail::accumulate(b, gb.colwise().sum());
      }
    }
  });
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& a, Scalar factor) {
  MatrixX<Scalar> v = a.value() * factor;
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a},
                                     [a, factor](const MatrixX<Scalar>& g) { detail::accumulate(a, g * factor); });
}

template <typename Scalar>
Tensor<Scalar> sigmoid(const Tensor<Scalar>& a) {
  MatrixX<Scalar> v = a.value().unaryExpr([](Scalar x) {
    // split by sign so exp never overflows
    if (x >= 0) return Scalar(1) / (Scalar(1) + std::exp(-x));
    Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
  });
  MatrixX<Scalar> y = v;
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a}, [a, y](const MatrixX<Scalar>& g) {
    detail::accumulate(a, g.cwiseProduct(y.cwiseProduct((Scalar(1) - y.array()).matrix())));
  });
}

template <typename Scalar>
Tensor<Scalar> tanh(const Tensor<Scalar>& a) {
  MatrixX<Scalar> v = a.value().array().tanh().matrix();
  MatrixX<Scalar> y = v;
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a}, [a, y](const MatrixX<Scalar>& g) {
    detail::accumulate(a, g.cwiseProduct((Scalar(1) - y.array().square()).matrix()));
  });
}

template <typename Scalar>
Tensor<Scalar> exp(const Tensor<Scalar>& a) {
  MatrixX<Scalar> v = a.value().array().exp().matrix();
  MatrixX<Scalar> y = v;
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a},
                                     [a, y](const MatrixX<Scalar>& g) { detail::accumulate(a, g.cwiseProduct(y)); });
}

template <typename Scalar>
Tensor<Scalar> log(const Tensor<Scalar>& a) {
  MatrixX<Scalar> v = a.value().array().log().matrix();
  return detail::make_result<Scalar>(a.shape(), std::move(v), {a}, [a](const MatrixX<Scalar>& g) {
    detail::accumulate(a, g.cwiseQuotient(a.value()));
  });
}

enum class Elementwise { add, sub, mul, sigmoid, tanh, exp };

/// Dispatch by name; binary ops take two operands, unary ops one.
template <typename Scalar>
Tensor<Scalar> elementwise(Elementwise op, const std::vector<Tensor<Scalar>>& operands) {
  const bool binary = op == Elementwise::add || op == Elementwise::sub || op == Elementwise::mul;
  if (operands.size() != (binary ? 2u : 1u)) throw InvalidArgument("elementwise: wrong operand count");
  switch (op) {
    case Elementwise::add: return add(operands[0], operands[1]);
    case Elementwise::sub: return sub(operands[0], operands[1]);
    case Elementwise::mul: return mul(operands[0], operands[1]);
    case Elementwise::sigmoid: return sigmoid(operands[0]);
    case Elementwise::tanh: return tanh(operands[0]);
    case Elementwise::exp: return exp(operands[0]);
  }
  throw InvalidArgument("elementwise: unknown op");
}

/// Sum of all elements as a [1] tensor.
template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& a) {
  MatrixX<Scalar> v(1, 1);
  v(0, 0) = a.value().sum();
  return detail::make_result<Scalar>({1}, std::move(v), {a}, [a](const MatrixX<Scalar>& g) {
    detail::accumulate(a, MatrixX<Scalar>::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

/// Max-shifted softmax along `axis`.
template <typename Scalar>
Tensor<Scalar> softmax(const Tensor<Scalar>& x, Index axis) {
  const Index ax = detail::storage_axis(x.rank(), axis, "softmax");
  MatrixX<Scalar> y(x.rows(), x.cols());
  if (ax == 1) {
    for (Index r = 0; r < x.rows(); ++r) {
      auto row = x.value().row(r);
      Scalar m = row.maxCoeff();
      y.row(r) = (row.array() - m).exp().matrix();
      y.row(r) /= y.row(r).sum();
    }
  } else {
    for (Index c = 0; c < x.cols(); ++c) {
      auto col = x.value().col(c);
      Scalar m = col.maxCoeff();
      y.col(c) = (col.array() - m).exp().matrix();
      y.col(c) /= y.col(c).sum();
    }
  }
  MatrixX<Scalar> yy = y;
  return detail::make_result<Scalar>(x.shape(), std::move(y), {x}, [x, yy, ax](const MatrixX<Scalar>& g) {
    MatrixX<Scalar> gy = g.cwiseProduct(yy);
    MatrixX<Scalar> dx;
    if (ax == 1) {
      dx = gy - (yy.array().colwise() * gy.rowwise().sum().array()).matrix();
    } else {
      dx = gy - (yy.array().rowwise() * gy.colwise().sum().array()).matrix();
    }
    detail::accumulate(x, dx);
  });
}

/// Concatenation along `axis`; all other dimensions must agree.
template <typename Scalar>
Tensor<Scalar> concat(const std::vector<Tensor<Scalar>>& parts, Index axis) {
  if (parts.empty()) throw InvalidArgument("concat: no parts");
  const Index rank = parts.front().rank();
  const Index ax = detail::storage_axis(rank, axis, "concat");
  Index total = 0;
  for (const auto& p : parts) {
    if (p.rank() != rank) throw ShapeError("concat: rank mismatch");
    if (ax == 1 && p.rows() != parts.front().rows()) throw ShapeError("concat: row count mismatch");
    if (ax == 0 && p.cols() != parts.front().cols()) throw ShapeError("concat: column count mismatch");
    total += ax == 1 ? p.cols() : p.rows();
  }
  MatrixX<Scalar> v = ax == 1 ? MatrixX<Scalar>(parts.front().rows(), total)
                              : MatrixX<Scalar>(total, parts.front().cols());
  Index offset = 0;
  for (const auto& p : parts) {
    if (ax == 1) {
      v.middleCols(offset, p.cols()) = p.value();
      offset += p.cols();
    } else {
      v.middleRows(offset, p.rows()) = p.value();
      offset += p.rows();
    }
  }
  Shape shape = parts.front().shape();
  shape[static_cast<std::size_t>(axis)] = total;
  return detail::make_result<Scalar>(shape, std::move(v), parts, [parts, ax](const MatrixX<Scalar>& g) {
    Index off = 0;
    for (const auto& p : parts) {
      if (ax == 1) {
        detail::accumulate(p, g.middleCols(off, p.cols()));
        off += p.cols();
      } else {
        detail::accumulate(p, g.middleRows(off, p.rows()));
        off += p.rows();
      }
    }
  });
}

/// Contiguous sub-range [start, start+length) along `axis`.
template <typename Scalar>
Tensor<Scalar> slice(const Tensor<Scalar>& x, Index axis, Index start, Index length) {
  const Index ax = detail::storage_axis(x.rank(), axis, "slice");
  const Index extent = ax == 1 ? x.cols() : x.rows();
  if (start < 0 || length <= 0 || start + length > extent) throw ShapeError("slice: range out of bounds");
  MatrixX<Scalar> v = ax == 1 ? MatrixX<Scalar>(x.value().middleCols(start, length))
                              : MatrixX<Scalar>(x.value().middleRows(start, length));
  Shape shape = x.shape();
  shape[static_cast<std::size_t>(axis)] = length;
  return detail::make_result<Scalar>(shape, std::move(v), {x}, [x, ax, start, length](const MatrixX<Scalar>& g) {
    if (!x.requires_grad()) return;
    auto& buf = Tensor<Scalar>(x).grad_buffer();
    if (ax == 1) {
      buf.middleCols(start, length) += g;
    } else {
      buf.middleRows(start, length) += g;
    }
  });
}

/// Equal-size pieces along `axis`; inverse of concat.
template <typename Scalar>
std::vector<Tensor<Scalar>> split(const Tensor<Scalar>& x, Index axis, const std::vector<Index>& sizes) {
  std::vector<Tensor<Scalar>> out;
  Index start = 0;
  for (Index s : sizes) {
    out.push_back(slice(x, axis, start, s));
    start += s;
  }
  const Index ax = detail::storage_axis(x.rank(), axis, "split");
  if (start != (ax == 1 ? x.cols() : x.rows())) throw ShapeError("split: sizes do not cover the axis");
  return out;
}

/// Rows of a rank-2 table selected by index (embedding lookup); the
/// gradient scatters back into the selected rows.
template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& table, const std::vector<Index>& rows) {
  detail::require_rank2(table, "gather_rows");
  if (rows.empty()) throw InvalidArgument("gather_rows: no rows requested");
  MatrixX<Scalar> v(static_cast<Index>(rows.size()), table.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= table.rows()) {
      throw InvalidArgument("gather_rows: index " + std::to_string(rows[i]) + " out of range");
    }
    v.row(static_cast<Index>(i)) = table.value().row(rows[i]);
  }
  return detail::make_result<Scalar>({static_cast<Index>(rows.size()), table.cols()}, std::move(v), {table},
                                     [table, rows](const MatrixX<Scalar>& g) {
                                       auto& buf = Tensor<Scalar>(table).grad_buffer();
                                       for (std::size_t i = 0; i < rows.size(); ++i) {
                                         buf.row(rows[i]) += g.row(static_cast<Index>(i));
                                       }
                                     });
}

/// Row-wise select: out.row(b) = keep[b] ? on.row(b) : off.row(b).
/// Used to freeze recurrent states of padded batch rows.
template <typename Scalar>
Tensor<Scalar> blend_rows(const std::vector<bool>& keep, const Tensor<Scalar>& on, const Tensor<Scalar>& off) {
  if (on.shape() != off.shape()) throw ShapeError("blend_rows: operand shapes differ");
  if (static_cast<Index>(keep.size()) != on.rows()) throw ShapeError("blend_rows: mask length mismatch");
  MatrixX<Scalar> v = off.value();
  for (Index r = 0; r < v.rows(); ++r) {
    if (keep[static_cast<std::size_t>(r)]) v.row(r) = on.value().row(r);
  }
  return detail::make_result<Scalar>(on.shape(), std::move(v), {on, off}, [keep, on, off](const MatrixX<Scalar>& g) {
    MatrixX<Scalar> g_on = MatrixX<Scalar>::Zero(g.rows(), g.cols());
    MatrixX<Scalar> g_off = MatrixX<Scalar>::Zero(g.rows(), g.cols());
    for (Index r = 0; r < g.rows(); ++r) {
      (keep[static_cast<std::size_t>(r)] ? g_on : g_off).row(r) = g.row(r);
    }
    detail::accumulate(on, g_on);
    detail::accumulate(off, g_off);
  });
}

/// Batched dot products against position-major stacked keys.
///
/// query is [B,d]; keys is [T*B,d] where row t*B+b holds position t of
/// batch item b. Result [B,T] with out(b,t) = query.row(b) . keys.row(t*B+b).
template <typename Scalar>
Tensor<Scalar> row_dots(const Tensor<Scalar>& query, const Tensor<Scalar>& keys) {
  detail::require_rank2(query, "row_dots");
  detail::require_rank2(keys, "row_dots");
  const Index batch = query.rows();
  if (keys.cols() != query.cols() || keys.rows() % batch != 0) {
    throw ShapeError("row_dots: keys " + shape_string(keys.shape()) + " incompatible with query " +
                     shape_string(query.shape()));
  }
  const Index steps = keys.rows() / batch;
  MatrixX<Scalar> v(batch, steps);
  for (Index t = 0; t < steps; ++t) {
    v.col(t) = query.value().cwiseProduct(keys.value().middleRows(t * batch, batch)).rowwise().sum();
  }
  return detail::make_result<Scalar>({batch, steps}, std::move(v), {query, keys},
                                     [query, keys, batch, steps](const MatrixX<Scalar>& g) {
                                       if (query.requires_grad()) {
                                         MatrixX<Scalar> gq = MatrixX<Scalar>::Zero(batch, query.cols());
                                         for (Index t = 0; t < steps; ++t) {
                                           gq += (keys.value().middleRows(t * batch, batch).array().colwise() *
                                                  g.col(t).array())
                                                     .matrix();
                                         }
                                         detail::accumulate(query, gq);
                                       }
                                       if (keys.requires_grad()) {
                                         auto& buf = Tensor<Scalar>(keys).grad_buffer();
                                         for (Index t = 0; t < steps; ++t) {
                                           buf.middleRows(t * batch, batch) +=
                                               (query.value().array().colwise() * g.col(t).array()).matrix();
                                         }
                                       }
                                     });
}

/// Weighted sum of position-major stacked rows: weights [B,T], rows
/// [T*B,d] -> [B,d] with out.row(b) = sum_t weights(b,t) * rows.row(t*B+b).
template <typename Scalar>
Tensor<Scalar> weighted_rows(const Tensor<Scalar>& weights, const Tensor<Scalar>& rows) {
  detail::require_rank2(weights, "weighted_rows");
  detail::require_rank2(rows, "weighted_rows");
  const Index batch = weights.rows();
  const Index steps = weights.cols();
  if (rows.rows() != batch * steps) throw ShapeError("weighted_rows: rows must be [T*B,d]");
  MatrixX<Scalar> v = MatrixX<Scalar>::Zero(batch, rows.cols());
  for (Index t = 0; t < steps; ++t) {
    v += (rows.value().middleRows(t * batch, batch).array().colwise() * weights.value().col(t).array()).matrix();
  }
  return detail::make_result<Scalar>({batch, rows.cols()}, std::move(v), {weights, rows},
                                     [weights, rows, batch, steps](const MatrixX<Scalar>& g) {
                                       if (weights.requires_grad()) {
                                         MatrixX<Scalar> gw(batch, steps);
                                         for (Index t = 0; t < steps; ++t) {
                                           gw.col(t) = g.cwiseProduct(rows.value().middleRows(t * batch, batch))
                                                           .rowwise()
                                                           .sum();
                                         }
                                         detail::accumulate(weights, gw);
                                       }
                                       if (rows.requires_grad()) {
                                         auto& buf = Tensor<Scalar>(rows).grad_buffer();
                                         for (Index t = 0; t < steps; ++t) {
                                           buf.middleRows(t * batch, batch) +=
                                               (g.array().colwise() * weights.value().col(t).array()).matrix();
                                         }
                                       }
                                     });
}

/// Weighted softmax cross-entropy over the rows of `logits` [B,V]:
/// sum_b weights[b] * -log softmax(logits.row(b))[targets[b]].
/// Rows with weight 0 (padding) contribute nothing.
template <typename Scalar>
Tensor<Scalar> cross_entropy(const Tensor<Scalar>& logits, const std::vector<Index>& targets,
                             const std::vector<Scalar>& weights) {
  detail::require_rank2(logits, "cross_entropy");
  const Index batch = logits.rows();
  if (static_cast<Index>(targets.size()) != batch || static_cast<Index>(weights.size()) != batch) {
    throw ShapeError("cross_entropy: targets/weights length must equal row count");
  }
  MatrixX<Scalar> probs(batch, logits.cols());
  Scalar total = 0;
  for (Index b = 0; b < batch; ++b) {
    const Index t = targets[static_cast<std::size_t>(b)];
    if (t < 0 || t >= logits.cols()) throw InvalidArgument("cross_entropy: target out of range");
    auto row = logits.value().row(b);
    const Scalar m = row.maxCoeff();
    probs.row(b) = (row.array() - m).exp().matrix();
    const Scalar z = probs.row(b).sum();
    probs.row(b) /= z;
    total += weights[static_cast<std::size_t>(b)] * (std::log(z) + m - row(t));
  }
  MatrixX<Scalar> v(1, 1);
  v(0, 0) = total;
  return detail::make_result<Scalar>({1}, std::move(v), {logits},
                                     [logits, targets, weights, probs](const MatrixX<Scalar>& g) {
                                       MatrixX<Scalar> d = probs;
                                       for (Index b = 0; b < d.rows(); ++b) {
                                         d(b, targets[static_cast<std::size_t>(b)]) -= Scalar(1);
                                         d.row(b) *= weights[static_cast<std::size_t>(b)] * g(0, 0);
                                       }
                                       detail::accumulate(logits, d);
                                     });
}

/// Inverted dropout with an explicit keep mask; survivors are scaled by
/// 1/(1-ratio).
template <typename Scalar>
Tensor<Scalar> masked_scale(const Tensor<Scalar>& x, const MatrixX<Scalar>& mask) {
  if (mask.rows() != x.rows() || mask.cols() != x.cols()) throw ShapeError("masked_scale: mask shape mismatch");
  MatrixX<Scalar> v = x.value().cwiseProduct(mask);
  return detail::make_result<Scalar>(x.shape(), std::move(v), {x},
                                     [x, mask](const MatrixX<Scalar>& g) { detail::accumulate(x, g.cwiseProduct(mask)); });
}

}  // namespace sawr
