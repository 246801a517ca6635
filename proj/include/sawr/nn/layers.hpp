#pragma once

#include "sawr/nn/params.hpp"
#include "sawr/tensor/ops.hpp"

namespace sawr {

/// x W + b, with x [B,in], W [in,out], b [1,out].
template <typename Scalar>
Tensor<Scalar> linear(const Tensor<Scalar>& x, const Tensor<Scalar>& W, const Tensor<Scalar>& b) {
  return add(matmul(x, W), b);
}

template <typename Scalar>
struct LinearParams {
  Tensor<Scalar> W;
  Tensor<Scalar> b;

  static void create(ParamTable<Scalar>& table, const std::string& prefix, Index in, Index out, double range,
                     Rng& rng) {
    table.add_uniform(prefix + ".W", {in, out}, range, rng);
    table.add_uniform(prefix + ".b", {1, out}, range, rng);
  }

  static LinearParams bind(const ParamTable<Scalar>& table, const std::string& prefix) {
    return {table.get(prefix + ".W"), table.get(prefix + ".b")};
  }

  Tensor<Scalar> operator()(const Tensor<Scalar>& x) const { return linear(x, W, b); }
};

enum class Mode { train, eval };

/// Inverted dropout: in train mode each element is zeroed with probability
/// `ratio` and survivors are scaled by 1/(1-ratio); eval mode is identity.
template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& x, double ratio, Mode mode, Rng& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw InvalidArgument("dropout: ratio must be in [0,1)");
  if (mode == Mode::eval || ratio == 0.0) return x;
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - ratio));
  MatrixX<Scalar> mask(x.rows(), x.cols());
  for (Index r = 0; r < mask.rows(); ++r) {
    for (Index c = 0; c < mask.cols(); ++c) mask(r, c) = rng.bernoulli(ratio) ? Scalar(0) : keep_scale;
  }
  return masked_scale(x, mask);
}

}  // namespace sawr
