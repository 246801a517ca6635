#include "sawr/syntax/tree_gru.hpp"

#include <algorithm>

#include "sawr/tensor/ops.hpp"

namespace sawr::syntax {

void TreeGruParams::create(ParamTable<double>& table, const std::string& prefix, Index in, Index hidden,
                           double range, Rng& rng) {
  GruParams<double>::create(table, prefix + ".bu", in, hidden, range, rng);
  GruParams<double>::create(table, prefix + ".td", in, hidden, range, rng);
  table.add_uniform(prefix + ".root", {1, hidden}, range, rng);
}

TreeGruParams TreeGruParams::bind(const ParamTable<double>& table, const std::string& prefix) {
  return {GruParams<double>::bind(table, prefix + ".bu"), GruParams<double>::bind(table, prefix + ".td"),
          table.get(prefix + ".root")};
}

LevelSchedule batch_by_level(const std::vector<depparse::DependencyTree>& trees) {
  LevelSchedule schedule;
  for (std::size_t b = 0; b < trees.size(); ++b) {
    const auto& tree = trees[b];
    if (auto problem = depparse::tree_problem(tree); !problem.empty()) {
      throw InvalidArgument("batch_by_level: tree " + std::to_string(b) + ": " + problem);
    }
    const int n = static_cast<int>(tree.size());
    auto kids = depparse::children_of(tree);
    std::vector<int> height(static_cast<std::size_t>(n + 1), -1);
    std::vector<int> depth(static_cast<std::size_t>(n + 1), -1);
    // Breadth-first order from the root: depths forward, heights in reverse.
    std::vector<int> order{kids[0].front()};
    for (std::size_t k = 0; k < order.size(); ++k) {
      for (int c : kids[static_cast<std::size_t>(order[k])]) order.push_back(c);
    }
    for (int node : order) {
      const int h = tree.heads[static_cast<std::size_t>(node - 1)];
      depth[static_cast<std::size_t>(node)] = h == 0 ? 0 : depth[static_cast<std::size_t>(h)] + 1;
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int h = 0;
      for (int c : kids[static_cast<std::size_t>(*it)]) h = std::max(h, height[static_cast<std::size_t>(c)] + 1);
      height[static_cast<std::size_t>(*it)] = h;
    }
    for (int node = 1; node <= n; ++node) {
      const auto hb = static_cast<std::size_t>(height[static_cast<std::size_t>(node)]);
      const auto dp = static_cast<std::size_t>(depth[static_cast<std::size_t>(node)]);
      if (schedule.bottom_up.size() <= hb) schedule.bottom_up.resize(hb + 1);
      if (schedule.top_down.size() <= dp) schedule.top_down.resize(dp + 1);
      schedule.bottom_up[hb].push_back({b, node});
      schedule.top_down[dp].push_back({b, node});
    }
  }
  return schedule;
}

Tensord tree_gru_encode_batch(const Tensord& embeddings, const std::vector<depparse::DependencyTree>& trees,
                              const TreeGruParams& p) {
  std::vector<Index> offset(trees.size() + 1, 0);
  for (std::size_t b = 0; b < trees.size(); ++b) offset[b + 1] = offset[b] + static_cast<Index>(trees[b].size());
  const Index total = offset.back();
  if (total == 0 || embeddings.rows() != total) {
    throw InvalidArgument("tree_gru_encode: " + std::to_string(embeddings.rows()) + " embeddings for " +
                          std::to_string(total) + " tree nodes");
  }
  const Index hidden = p.hidden_dim();
  const auto schedule = batch_by_level(trees);
  auto global = [&](const NodeRef& r) { return offset[r.tree] + r.token - 1; };

  // Bottom-up. bank_row[g] is the row of node g in the concatenation of
  // all level outputs computed so far.
  std::vector<Index> bu_row(static_cast<std::size_t>(total), -1);
  std::vector<Tensord> bu_levels;
  Index bank_rows = 0;
  for (const auto& level : schedule.bottom_up) {
    std::vector<Index> rows;
    for (const auto& r : level) rows.push_back(global(r));
    Tensord x = gather_rows(embeddings, rows);
    Tensord h_in;
    if (bu_levels.empty()) {
      h_in = Tensord::zeros({static_cast<Index>(level.size()), hidden});
    } else {
      MatrixX<double> sum = MatrixX<double>::Zero(static_cast<Index>(level.size()), bank_rows);
      for (std::size_t i = 0; i < level.size(); ++i) {
        const auto& tree = trees[level[i].tree];
        for (std::size_t d = 0; d < tree.size(); ++d) {
          if (tree.heads[d] == level[i].token) {
            sum(static_cast<Index>(i), bu_row[static_cast<std::size_t>(offset[level[i].tree] + static_cast<Index>(d))]) = 1;
          }
        }
      }
      h_in = matmul(Tensord::from_matrix(std::move(sum)), concat(bu_levels, 0));
    }
    bu_levels.push_back(gru_step(x, h_in, p.bottom_up));
    for (std::size_t i = 0; i < level.size(); ++i) bu_row[static_cast<std::size_t>(rows[i])] = bank_rows + static_cast<Index>(i);
    bank_rows += static_cast<Index>(level.size());
  }

  // Top-down.
  std::vector<Index> td_row(static_cast<std::size_t>(total), -1);
  std::vector<Tensord> td_levels;
  bank_rows = 0;
  for (const auto& level : schedule.top_down) {
    std::vector<Index> rows;
    for (const auto& r : level) rows.push_back(global(r));
    Tensord x = gather_rows(embeddings, rows);
    Tensord h_in;
    if (td_levels.empty()) {
      h_in = matmul(Tensord::from_matrix(MatrixX<double>::Ones(static_cast<Index>(level.size()), 1)), p.root);
    } else {
      std::vector<Index> heads;
      for (const auto& r : level) {
        const int h = trees[r.tree].heads[static_cast<std::size_t>(r.token - 1)];
        heads.push_back(td_row[static_cast<std::size_t>(offset[r.tree] + h - 1)]);
      }
      h_in = gather_rows(concat(td_levels, 0), heads);
    }
    td_levels.push_back(gru_step(x, h_in, p.top_down));
    for (std::size_t i = 0; i < level.size(); ++i) td_row[static_cast<std::size_t>(rows[i])] = bank_rows + static_cast<Index>(i);
    bank_rows += static_cast<Index>(level.size());
  }

  Tensord bu = gather_rows(concat(bu_levels, 0), bu_row);
  Tensord td = gather_rows(concat(td_levels, 0), td_row);
  return concat<double>({bu, td}, 1);
}

Tensord tree_gru_encode(const Tensord& embeddings, const depparse::DependencyTree& tree, const TreeGruParams& p) {
  if (embeddings.rows() != static_cast<Index>(tree.size())) {
    throw InvalidArgument("tree_gru_encode: tree/token length mismatch");
  }
  return tree_gru_encode_batch(embeddings, {tree}, p);
}

}  // namespace sawr::syntax
