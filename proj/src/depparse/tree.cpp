#include "sawr/depparse/tree.hpp"

#include <algorithm>

namespace sawr::depparse {

std::string tree_problem(const DependencyTree& tree) {
  const int n = static_cast<int>(tree.size());
  if (n == 0) return "empty tree";
  if (!tree.labels.empty() && tree.labels.size() != tree.heads.size()) return "label count differs from token count";
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const int h = tree.heads[static_cast<std::size_t>(i)];
    if (h < 0 || h > n) return "head " + std::to_string(h) + " of token " + std::to_string(i + 1) + " out of range";
    if (h == i + 1) return "token " + std::to_string(i + 1) + " is its own head";
    if (h == 0) ++roots;
  }
  if (roots != 1) return std::to_string(roots) + " roots";
  for (int i = 1; i <= n; ++i) {
    int node = i;
    for (int steps = 0; node != 0; ++steps) {
      if (steps > n) return "cycle through token " + std::to_string(i);
      node = tree.heads[static_cast<std::size_t>(node - 1)];
    }
  }
  return {};
}

bool is_valid_tree(const DependencyTree& tree) { return tree_problem(tree).empty(); }

bool is_projective(const DependencyTree& tree) {
  const int n = static_cast<int>(tree.size());
  for (int i = 1; i <= n; ++i) {
    const int a1 = std::min(i, tree.heads[static_cast<std::size_t>(i - 1)]);
    const int b1 = std::max(i, tree.heads[static_cast<std::size_t>(i - 1)]);
    for (int j = i + 1; j <= n; ++j) {
      const int a2 = std::min(j, tree.heads[static_cast<std::size_t>(j - 1)]);
      const int b2 = std::max(j, tree.heads[static_cast<std::size_t>(j - 1)]);
      if ((a1 < a2 && a2 < b1 && b1 < b2) || (a2 < a1 && a1 < b2 && b2 < b1)) return false;
    }
  }
  return true;
}

void normalize_single_root(DependencyTree& tree) {
  int first = 0;
  for (std::size_t i = 0; i < tree.heads.size(); ++i) {
    if (tree.heads[i] != 0) continue;
    if (first == 0) {
      first = static_cast<int>(i) + 1;
    } else {
      tree.heads[i] = first;
    }
  }
}

bool dominates(const DependencyTree& tree, int ancestor, int node) {
  const std::size_t n = tree.size();
  for (std::size_t steps = 0; steps <= n + 1; ++steps) {
    if (node == ancestor) return true;
    if (node == 0) return false;
    node = tree.heads[static_cast<std::size_t>(node - 1)];
  }
  return false;
}

std::vector<std::vector<int>> children_of(const DependencyTree& tree) {
  std::vector<std::vector<int>> kids(tree.size() + 1);
  for (std::size_t i = 0; i < tree.size(); ++i) kids[static_cast<std::size_t>(tree.heads[i])].push_back(static_cast<int>(i) + 1);
  return kids;
}

DependencyTree projectivize(const DependencyTree& input) {
  DependencyTree tree = input;
  const int n = static_cast<int>(tree.size());
  while (true) {
    int best = 0;
    int best_len = n + 2;
    for (int d = 1; d <= n; ++d) {
      const int h = tree.heads[static_cast<std::size_t>(d - 1)];
      const int lo = std::min(h, d);
      const int hi = std::max(h, d);
      bool nonprojective = false;
      for (int k = lo + 1; k < hi && !nonprojective; ++k) nonprojective = !dominates(tree, h, k);
      if (nonprojective && hi - lo < best_len) {
        best = d;
        best_len = hi - lo;
      }
    }
    if (best == 0) break;
    const int h = tree.heads[static_cast<std::size_t>(best - 1)];
    tree.heads[static_cast<std::size_t>(best - 1)] = tree.heads[static_cast<std::size_t>(h - 1)];
  }
  return tree;
}

}  // namespace sawr::depparse
