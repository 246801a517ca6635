#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "sawr/nn/params.hpp"

namespace sawr {

/// Global L2 norm over all gradient buffers in the table.
template <typename Scalar>
Scalar global_grad_norm(const ParamTable<Scalar>& params) {
  Scalar sq = 0;
  for (const auto& name : params.names()) {
    const auto& t = params.get(name);
    if (t.has_grad()) sq += t.grad().squaredNorm();
  }
  return std::sqrt(sq);
}

/// Rescales every gradient by threshold/norm when the global norm exceeds
/// `threshold`. Returns the norm before clipping.
template <typename Scalar>
Scalar clip_gradients(ParamTable<Scalar>& params, Scalar threshold) {
  if (!(threshold > 0)) throw InvalidArgument("clip_gradients: threshold must be positive");
  const Scalar norm = global_grad_norm(params);
  if (norm > threshold) {
    const Scalar factor = threshold / norm;
    for (const auto& name : params.names()) {
      auto& t = params.get(name);
      if (t.has_grad()) t.grad_buffer() *= factor;
    }
  }
  return norm;
}

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  long step = 0;
  std::unordered_map<std::string, MatrixX<Scalar>> first_moment;
  std::unordered_map<std::string, MatrixX<Scalar>> second_moment;
};

/// One bias-corrected Adam update of every parameter not listed in
/// `frozen`. Parameters without a gradient buffer are treated as having a
/// zero gradient.
template <typename Scalar>
void adam_step(ParamTable<Scalar>& params, AdamState<Scalar>& state, double lr,
               const std::unordered_set<std::string>& frozen = {}) {
  if (!(lr > 0)) throw InvalidArgument("adam_step: learning rate must be positive");
  state.step += 1;
  const double b1 = state.config.beta1;
  const double b2 = state.config.beta2;
  const Scalar correction1 = static_cast<Scalar>(1.0 - std::pow(b1, static_cast<double>(state.step)));
  const Scalar correction2 = static_cast<Scalar>(1.0 - std::pow(b2, static_cast<double>(state.step)));
  const auto eps = static_cast<Scalar>(state.config.epsilon);
  for (const auto& name : params.names()) {
    if (frozen.count(name)) continue;
    auto& p = params.get(name);
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.size() == 0) {
      m = MatrixX<Scalar>::Zero(p.rows(), p.cols());
      v = MatrixX<Scalar>::Zero(p.rows(), p.cols());
    } else if (m.rows() != p.rows() || m.cols() != p.cols()) {
      throw ShapeError("adam_step: moment shape mismatch for " + name);
    }
    if (!p.has_grad()) {
      m *= static_cast<Scalar>(b1);
      v *= static_cast<Scalar>(b2);
    } else {
      const auto& g = p.grad();
      m = static_cast<Scalar>(b1) * m + static_cast<Scalar>(1 - b1) * g;
      v = static_cast<Scalar>(b2) * v + static_cast<Scalar>(1 - b2) * g.cwiseAbs2();
    }
    auto mhat = (m / correction1).array();
    auto vhat = (v / correction2).array();
    p.mutable_value().array() -= static_cast<Scalar>(lr) * mhat / (vhat.sqrt() + eps);
  }
}

}  // namespace sawr
