#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sawr/tensor/tensor.hpp"

namespace sawr {

/// Named trainable tensors, keyed by hierarchical dotted names such as
/// "encoder.fwd.update.W". Iteration follows insertion order.
template <typename Scalar>
class ParamTable {
 public:
  Tensor<Scalar>& add(const std::string& name, Tensor<Scalar> t) {
    if (index_.count(name)) throw InvalidArgument("duplicate parameter " + name);
    t.set_requires_grad(true);
    index_.emplace(name, tensors_.size());
    names_.push_back(name);
    tensors_.push_back(std::move(t));
    return tensors_.back();
  }

  /// Registers a tensor drawn from U[-range, range).
  Tensor<Scalar>& add_uniform(const std::string& name, const Shape& shape, double range, Rng& rng) {
    return add(name, init_uniform<Scalar>(shape, -range, range, rng, true));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  const Tensor<Scalar>& get(const std::string& name) const { return tensors_.at(position(name)); }
  Tensor<Scalar>& get(const std::string& name) { return tensors_.at(position(name)); }

  /// Swaps in a different tensor under an existing name (used by gradient
  /// checks and checkpoint loading).
  void replace(const std::string& name, Tensor<Scalar> t) {
    auto& slot = tensors_.at(position(name));
    if (slot.shape() != t.shape()) {
      throw ShapeError("replace " + name + ": shape " + shape_string(t.shape()) + " != " +
                       shape_string(slot.shape()));
    }
    slot = std::move(t);
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  std::vector<std::string> names_with_prefix(std::string_view prefix) const {
    std::vector<std::string> out;
    for (const auto& n : names_) {
      if (n.compare(0, prefix.size(), prefix) == 0) out.push_back(n);
    }
    return out;
  }

  void zero_grads() {
    for (auto& t : tensors_) t.clear_grad();
  }

  Index element_count() const {
    Index n = 0;
    for (const auto& t : tensors_) n += t.size();
    return n;
  }

 private:
  std::size_t position(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InvalidArgument("unknown parameter " + name);
    return it->second;
  }

  std::vector<std::string> names_;
  std::vector<Tensor<Scalar>> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sawr
