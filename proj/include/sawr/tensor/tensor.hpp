#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sawr/errors.hpp"
#include "sawr/random.hpp"

namespace sawr {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

inline Index shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

template <typename Scalar>
class Tape;

/// Dense rank-1 or rank-2 value that can take part in reverse-mode
/// differentiation.
///
/// Storage is an Eigen matrix: a rank-2 tensor [m,n] is an m x n matrix and
/// a rank-1 tensor [n] is a 1 x n row. Copies share the same storage; a
/// tensor is a handle.
template <typename Scalar>
class Tensor {
 public:
  using Matrix = MatrixX<Scalar>;

  struct Impl {
    Shape shape;
    Matrix value;
    Matrix grad;  // empty until first accumulation
    bool requires_grad = false;
  };

  Tensor() = default;

  Tensor(Shape shape, Matrix value, bool requires_grad = false) {
    check_shape(shape);
    auto [rows, cols] = storage_dims(shape);
    if (value.rows() != rows || value.cols() != cols) {
      throw ShapeError("tensor data " + std::to_string(value.rows()) + "x" +
                       std::to_string(value.cols()) + " does not match shape " +
                       shape_string(shape));
    }
    impl_ = std::make_shared<Impl>(Impl{std::move(shape), std::move(value), Matrix(), requires_grad});
  }

  /// Rank-2 tensor with the matrix's own dimensions.
  static Tensor from_matrix(Matrix value, bool requires_grad = false) {
    Shape shape{value.rows(), value.cols()};
    return Tensor(std::move(shape), std::move(value), requires_grad);
  }

  static Tensor zeros(const Shape& shape, bool requires_grad = false) {
    check_shape(shape);
    auto [rows, cols] = storage_dims(shape);
    return Tensor(shape, Matrix::Zero(rows, cols), requires_grad);
  }

  static Tensor vector(std::initializer_list<Scalar> values, bool requires_grad = false) {
    Matrix m(1, static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) m(0, i++) = v;
    return Tensor(Shape{static_cast<Index>(values.size())}, std::move(m), requires_grad);
  }

  static Tensor scalar(Scalar v, bool requires_grad = false) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return Tensor(Shape{1}, std::move(m), requires_grad);
  }

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl_->shape; }
  Index rank() const { return static_cast<Index>(impl_->shape.size()); }
  Index size() const { return impl_->value.size(); }
  Index rows() const { return impl_->value.rows(); }
  Index cols() const { return impl_->value.cols(); }

  const Matrix& value() const { return impl_->value; }
  /// In-place access for optimizers and tests. Never use on a tensor whose
  /// value has already been consumed by a recorded operation.
  Matrix& mutable_value() { return impl_->value; }

  Scalar item() const {
    if (size() != 1) throw InvalidArgument("item() on tensor of shape " + shape_string(shape()));
    return impl_->value(0, 0);
  }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool flag) { impl_->requires_grad = flag; }

  bool has_grad() const { return impl_->grad.size() != 0; }
  const Matrix& grad() const { return impl_->grad; }
  /// Gradient buffer, allocated as zeros on first use.
  Matrix& grad_buffer() {
    if (!has_grad()) impl_->grad = Matrix::Zero(rows(), cols());
    return impl_->grad;
  }
  void zero_grad() {
    if (has_grad()) impl_->grad.setZero();
  }
  void clear_grad() { impl_->grad = Matrix(); }

  /// Deep copy detached from any tape.
  Tensor clone(bool requires_grad = false) const {
    return Tensor(shape(), value(), requires_grad);
  }

  const Impl* id() const { return impl_.get(); }
  const std::shared_ptr<Impl>& impl() const { return impl_; }

  static std::pair<Index, Index> storage_dims(const Shape& shape) {
    if (shape.size() == 1) return {1, shape[0]};
    return {shape[0], shape[1]};
  }

  static void check_shape(const Shape& shape) {
    if (shape.empty() || shape.size() > 2) {
      throw InvalidArgument("tensor rank must be 1 or 2, got shape " + shape_string(shape));
    }
    for (Index d : shape) {
      if (d <= 0) throw InvalidArgument("non-positive dimension in shape " + shape_string(shape));
    }
  }

 private:
  std::shared_ptr<Impl> impl_;
};

namespace detail {

template <typename Scalar>
Tape<Scalar>*& active_tape_slot() {
  thread_local Tape<Scalar>* tape = nullptr;
  return tape;
}

}  // namespace detail

/// Ordered record of primitive operations for one forward pass.
///
/// Operations append to the tape that is active on the current thread (see
/// TapeScope) whenever one of their inputs requires a gradient. backward()
/// replays the records in reverse, so every record's inputs are either
/// leaves or outputs of earlier records.
template <typename Scalar>
class Tape {
 public:
  using Matrix = MatrixX<Scalar>;
  using Backward = std::function<void(const Matrix&)>;

  struct Record {
    std::vector<const void*> inputs;
    const void* output;
  };

  void record(const Tensor<Scalar>& output, const std::vector<Tensor<Scalar>>& inputs,
              Backward backward) {
    Record r{{}, output.id()};
    r.inputs.reserve(inputs.size());
    for (const auto& in : inputs) r.inputs.push_back(in.id());
    records_.push_back(std::move(r));
    outputs_.push_back(output.impl());
    backwards_.push_back(std::move(backward));
  }

  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }

  void clear() {
    records_.clear();
    outputs_.clear();
    backwards_.clear();
  }

  /// Propagates d(loss)/d(x) into every reachable leaf that requires a
  /// gradient. Leaf gradients accumulate across calls; intermediate
  /// gradients are reset at the start of each call.
  void backward(const Tensor<Scalar>& loss) {
    if (!loss.defined() || loss.size() != 1) {
      throw InvalidArgument("backward() needs a scalar loss");
    }
    if (records_.empty()) throw InvalidArgument("backward() on an empty tape");
    for (auto& out : outputs_) out->grad = Matrix();
    loss.impl()->grad = Matrix::Ones(1, 1);
    for (std::size_t i = records_.size(); i-- > 0;) {
      auto& out = outputs_[i];
      if (out->grad.size() == 0) continue;  // not on a path to the loss
      backwards_[i](out->grad);
    }
  }

 private:
  std::vector<Record> records_;
  std::vector<std::shared_ptr<typename Tensor<Scalar>::Impl>> outputs_;
  std::vector<Backward> backwards_;
};

/// Makes `tape` the active tape on this thread for the scope's lifetime.
template <typename Scalar>
class TapeScope {
 public:
  explicit TapeScope(Tape<Scalar>& tape) : previous_(detail::active_tape_slot<Scalar>()) {
    detail::active_tape_slot<Scalar>() = &tape;
  }
  ~TapeScope() { detail::active_tape_slot<Scalar>() = previous_; }
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape<Scalar>* previous_;
};

/// Inference scope: no tape is active, nothing is recorded.
template <typename Scalar>
class NoGradScope {
 public:
  NoGradScope() : previous_(detail::active_tape_slot<Scalar>()) {
    detail::active_tape_slot<Scalar>() = nullptr;
  }
  ~NoGradScope() { detail::active_tape_slot<Scalar>() = previous_; }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<Scalar>* previous_;
};

template <typename Scalar>
Tape<Scalar>* active_tape() {
  return detail::active_tape_slot<Scalar>();
}

/// Elements drawn uniformly from [low, high) by the seeded generator.
template <typename Scalar>
Tensor<Scalar> init_uniform(const Shape& shape, double low, double high, std::uint64_t seed,
                            bool requires_grad = false) {
  if (shape.empty()) throw InvalidArgument("init_uniform: empty shape");
  if (!(low < high)) throw InvalidArgument("init_uniform: low must be < high");
  Rng rng(seed);
  return init_uniform<Scalar>(shape, low, high, rng, requires_grad);
}

template <typename Scalar>
Tensor<Scalar> init_uniform(const Shape& shape, double low, double high, Rng& rng,
                            bool requires_grad = false) {
  if (shape.empty()) throw InvalidArgument("init_uniform: empty shape");
  if (!(low < high)) throw InvalidArgument("init_uniform: low must be < high");
  Tensor<Scalar> t = Tensor<Scalar>::zeros(shape, requires_grad);
  auto& m = t.mutable_value();
  // Row-major fill order, independent of Eigen's storage order.
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      auto v = static_cast<Scalar>(rng.uniform(low, high));
      if (!(v < static_cast<Scalar>(high))) {
        v = std::nextafter(static_cast<Scalar>(high), static_cast<Scalar>(low));
      }
      m(r, c) = v;
    }
  }
  return t;
}

}  // namespace sawr
