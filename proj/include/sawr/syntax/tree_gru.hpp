#pragma once

#include <string>
#include <vector>

#include "sawr/depparse/tree.hpp"
#include "sawr/nn/recurrent.hpp"

namespace sawr::syntax {

using Tensord = Tensor<double>;

/// Bidirectional Tree-GRU weights.
///
/// Bottom-up: bu_i = GRU(e_i, sum of bu_c over children c), leaves start
/// from a zero state. Top-down: td_i = GRU(e_i, td_head(i)), the root
/// starts from the learned vector `root`. Output row i is bu_i (+) td_i.
struct TreeGruParams {
  GruParams<double> bottom_up;
  GruParams<double> top_down;
  Tensord root;  // [1, hidden]

  static void create(ParamTable<double>& table, const std::string& prefix, Index in, Index hidden, double range,
                     Rng& rng);
  static TreeGruParams bind(const ParamTable<double>& table, const std::string& prefix);

  Index hidden_dim() const { return bottom_up.hidden_dim(); }
};

struct NodeRef {
  std::size_t tree = 0;
  int token = 0;  // 1-based

  bool operator==(const NodeRef&) const = default;
};

/// Level schedule over a batch of trees. bottom_up[k] holds every node of
/// height k (leaves are height 0); top_down[k] every node of depth k (roots
/// are depth 0). Within a level nodes are ordered by tree, then token.
struct LevelSchedule {
  std::vector<std::vector<NodeRef>> bottom_up;
  std::vector<std::vector<NodeRef>> top_down;
};

LevelSchedule batch_by_level(const std::vector<depparse::DependencyTree>& trees);

/// Encodes several sentences at once. `embeddings` stacks the word
/// vectors of all sentences in order ([sum n_b, in]); the result has the
/// same row order and 2 * hidden columns. One GRU call per level and
/// direction.
Tensord tree_gru_encode_batch(const Tensord& embeddings, const std::vector<depparse::DependencyTree>& trees,
                              const TreeGruParams& p);

/// Single sentence: embeddings [n, in] -> [n, 2 * hidden]. Throws
/// InvalidArgument when the tree and token counts differ.
Tensord tree_gru_encode(const Tensord& embeddings, const depparse::DependencyTree& tree, const TreeGruParams& p);

}  // namespace sawr::syntax
