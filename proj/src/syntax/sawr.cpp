#include "sawr/syntax/sawr.hpp"

#include "sawr/hash.hpp"
#include "sawr/nn/checkpoint.hpp"
#include "sawr/nn/layers.hpp"

namespace sawr::syntax {

namespace {
constexpr char kCacheMagic[8] = {'S', 'A', 'W', 'R', 'C', 'A', 'C', 'H'};
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

Tensord sawr_project(const Tensord& encoding, const SawrProjection& p) {
  if (encoding.rank() != 2 || encoding.cols() != p.W.rows()) {
    throw ShapeError("sawr_project: encoding " + shape_string(encoding.shape()) + " vs projection " +
                     shape_string(p.W.shape()));
  }
  return linear(encoding, p.W, p.b);
}

Tensord sawr_augment(const Tensord& embeddings, const Tensord& projected) {
  if (embeddings.rows() != projected.rows()) throw InvalidArgument("sawr_augment: sequence lengths differ");
  return concat<double>({embeddings, projected}, 1);
}

std::vector<Eigen::MatrixXd> extract_sawr(const depparse::BiaffineParser& parser,
                                          const std::vector<std::vector<std::string>>& sentences) {
  NoGradScope<double> no_grad;
  auto encoder = parser.encoder();
  std::vector<Eigen::MatrixXd> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) {
    if (s.empty()) {
      out.emplace_back(0, encoder.output_dim());
      continue;
    }
    out.push_back(encoder.encode(parser.ids(s)).value());
  }
  return out;
}

std::string serialize_sawr_cache(const SawrCache& cache) {
  std::string out(kCacheMagic, 8);
  ckpt::put<std::uint32_t>(out, kCacheVersion);
  ckpt::put<std::uint64_t>(out, cache.parser_hash);
  ckpt::put<std::uint64_t>(out, cache.records.size());
  for (const auto& [index, m] : cache.records) {
    ckpt::put<std::uint64_t>(out, index);
    ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    ckpt::put<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) ckpt::put<double>(out, m(r, c));
    }
  }
  return out;
}

SawrCache deserialize_sawr_cache(const std::string& bytes) {
  ckpt::Reader in(bytes);
  if (in.bytes(8) != std::string(kCacheMagic, 8)) throw DataError("not a SAWR cache (bad magic)");
  if (in.get<std::uint32_t>() != kCacheVersion) throw DataError("unsupported SAWR cache version");
  SawrCache cache;
  cache.parser_hash = in.get<std::uint64_t>();
  const auto count = in.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto index = static_cast<std::size_t>(in.get<std::uint64_t>());
    const auto n = in.get<std::uint32_t>();
    const auto dim = in.get<std::uint32_t>();
    Eigen::MatrixXd m(n, dim);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = in.get<double>();
    }
    cache.records.emplace(index, std::move(m));
  }
  if (!in.done()) throw DataError("trailing bytes after SAWR cache");
  return cache;
}

void write_sawr_cache(const std::string& path, const SawrCache& cache) {
  write_bytes(path, serialize_sawr_cache(cache));
}

SawrCache read_sawr_cache(const std::string& path, std::uint64_t expected_parser_hash) {
  auto cache = deserialize_sawr_cache(read_file_bytes(path));
  if (cache.parser_hash != expected_parser_hash) {
    throw DataError("SAWR cache " + path + " was built by parser " + hex64(cache.parser_hash) + ", expected " +
                    hex64(expected_parser_hash));
  }
  return cache;
}

}  // namespace sawr::syntax
