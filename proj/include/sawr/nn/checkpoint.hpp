#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <type_traits>
#include <string>
#include <vector>

#include "sawr/nn/params.hpp"

namespace sawr {

// Checkpoint container, all integers little-endian:
//
//   "SAWRCKPT"                       8 bytes magic
//   u32 version                      currently 1
//   u32 tensor count
//   per tensor:
//     u32 name length, name bytes (UTF-8)
//     u8  precision tag              4 = float32, 8 = float64
//     u32 rank, u64 dims[rank]
//     elements, row-major, IEEE-754 little-endian
//   u32 metadata count
//   per entry: u32 key length, key bytes, u64 value length, value bytes

inline constexpr char kCheckpointMagic[8] = {'S', 'A', 'W', 'R', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

namespace ckpt {

template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    char buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint truncated");
  }
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace ckpt

/// Serializes the named tensors (all of `params` unless `names` is given)
/// into the checkpoint byte layout.
template <typename Scalar>
std::string serialize_params(const ParamTable<Scalar>& params, const Metadata& meta = {},
                             const std::vector<std::string>* names = nullptr) {
  const auto& list = names ? *names : params.names();
  std::string out(kCheckpointMagic, 8);
  ckpt::put<std::uint32_t>(out, kCheckpointVersion);
  ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(list.size()));
  for (const auto& name : list) {
    const auto& t = params.get(name);
    ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    ckpt::put<std::uint8_t>(out, static_cast<std::uint8_t>(sizeof(Scalar)));
    ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (Index d : t.shape()) ckpt::put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) ckpt::put<Scalar>(out, t.value()(r, c));
    }
  }
  ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
    out += k;
    ckpt::put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
    out += v;
  }
  return out;
}

template <typename Scalar>
struct Checkpoint {
  std::vector<std::pair<std::string, Tensor<Scalar>>> tensors;
  Metadata meta;

  const Tensor<Scalar>* find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  }
};

template <typename Scalar>
Checkpoint<Scalar> deserialize_checkpoint(std::string bytes) {
  ckpt::Reader in(std::move(bytes));
  if (in.bytes(8) != std::string(kCheckpointMagic, 8)) throw DataError("not a checkpoint (bad magic)");
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint<Scalar> ck;
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.bytes(in.get<std::uint32_t>());
    const auto tag = in.get<std::uint8_t>();
    if (tag != 4 && tag != 8) throw DataError("bad precision tag for " + name);
    const auto rank = in.get<std::uint32_t>();
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<Index>(in.get<std::uint64_t>()));
    Tensor<Scalar> t = Tensor<Scalar>::zeros(shape);
    auto& m = t.mutable_value();
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        m(r, c) = tag == 8 ? static_cast<Scalar>(in.get<double>()) : static_cast<Scalar>(in.get<float>());
      }
    }
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  const auto meta_count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string key = in.bytes(in.get<std::uint32_t>());
    std::string value = in.bytes(static_cast<std::size_t>(in.get<std::uint64_t>()));
    ck.meta.emplace(std::move(key), std::move(value));
  }
  if (!in.done()) throw DataError("trailing bytes after checkpoint");
  return ck;
}

inline void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw PathError("write failed for " + path);
}

/// Copies checkpoint tensors into an existing table by name. Every name in
/// the table must be present with the same shape.
template <typename Scalar>
void load_into(ParamTable<Scalar>& params, const Checkpoint<Scalar>& ck, const std::string& prefix = "") {
  for (const auto& name : params.names_with_prefix(prefix)) {
    const auto* t = ck.find(name);
    if (!t) throw DataError("checkpoint lacks parameter " + name);
    auto& dst = params.get(name);
    if (dst.shape() != t->shape()) throw ShapeError("checkpoint shape mismatch for " + name);
    dst.mutable_value() = t->value();
  }
}

}  // namespace sawr
