#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sawr/depparse/parser.hpp"
#include "sawr/tensor/tensor.hpp"

namespace sawr::syntax {

using Tensord = Tensor<double>;

/// s_i = o_i W + b with W [parser_dim, sawr_dim] and b [1, sawr_dim].
struct SawrProjection {
  Tensord W;
  Tensord b;

  Index output_dim() const { return W.cols(); }
};

/// Positionwise projection of a parser encoding [n, parser_dim] (or one
/// batch position [B, parser_dim]).
Tensord sawr_project(const Tensord& encoding, const SawrProjection& p);

/// x_i = e_i (+) s_i. Throws InvalidArgument when the row counts differ.
Tensord sawr_augment(const Tensord& embeddings, const Tensord& projected);

/// Top-layer parser encodings of each sentence, computed without a tape.
std::vector<Eigen::MatrixXd> extract_sawr(const depparse::BiaffineParser& parser,
                                          const std::vector<std::vector<std::string>>& sentences);

// SAWR cache file, little-endian:
//   "SAWRCACH", u32 version (1), u64 parser checkpoint hash, u64 record count
//   per record: u64 sentence index, u32 n, u32 dim, n*dim f64 row-major
struct SawrCache {
  std::uint64_t parser_hash = 0;
  std::map<std::size_t, Eigen::MatrixXd> records;
};

std::string serialize_sawr_cache(const SawrCache& cache);
SawrCache deserialize_sawr_cache(const std::string& bytes);
void write_sawr_cache(const std::string& path, const SawrCache& cache);
/// Throws DataError when the cache was produced by a different parser.
SawrCache read_sawr_cache(const std::string& path, std::uint64_t expected_parser_hash);

}  // namespace sawr::syntax
