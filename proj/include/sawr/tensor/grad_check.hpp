#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "sawr/tensor/tensor.hpp"

namespace sawr {

/// Compares reverse-mode gradients of a scalar function against central
/// finite differences.
///
/// Returns max over elements of |analytic - numeric| / max(|analytic|,
/// |numeric|, 1e-8). The numeric derivative uses the fourth-order central
/// stencil (-f(x+2e) + 8f(x+e) - 8f(x-e) + f(x-2e)) / 12e, which keeps
/// truncation error far below roundoff for the step sizes used in tests.
///
/// `f` must build its graph from the tensor it is given; it is called once
/// under a fresh tape and then repeatedly without one.
template <typename Scalar>
Scalar grad_check(const std::function<Tensor<Scalar>(const Tensor<Scalar>&)>& f, const Tensor<Scalar>& x,
                  Scalar eps) {
  if (!(eps > 0)) throw InvalidArgument("grad_check: eps must be positive");
  Tensor<Scalar> leaf = x.clone(true);
  Tape<Scalar> tape;
  {
    TapeScope<Scalar> scope(tape);
    Tensor<Scalar> loss = f(leaf);
    if (loss.size() != 1) throw InvalidArgument("grad_check: f must return a scalar");
    if (!tape.empty()) tape.backward(loss);
  }
  const MatrixX<Scalar> analytic =
      leaf.has_grad() ? leaf.grad() : MatrixX<Scalar>::Zero(leaf.rows(), leaf.cols());

  NoGradScope<Scalar> no_grad;
  Tensor<Scalar> probe = x.clone(false);
  auto eval_at = [&](Index r, Index c, Scalar delta) {
    const Scalar saved = probe.value()(r, c);
    probe.mutable_value()(r, c) = saved + delta;
    Scalar v = f(probe).item();
    probe.mutable_value()(r, c) = saved;
    return v;
  };

  Scalar worst = 0;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const Scalar numeric = (-eval_at(r, c, 2 * eps) + 8 * eval_at(r, c, eps) - 8 * eval_at(r, c, -eps) +
                              eval_at(r, c, -2 * eps)) /
                             (12 * eps);
      const Scalar a = analytic(r, c);
      const Scalar denom = std::max({std::abs(a), std::abs(numeric), Scalar(1e-8)});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace sawr
