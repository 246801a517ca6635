#pragma once

#include <string>
#include <vector>

namespace sawr::depparse {

/// Head/label arrays for one sentence. Tokens are numbered 1..n; heads[i]
/// is the head of token i+1 and 0 denotes the virtual root.
struct DependencyTree {
  std::vector<int> heads;
  std::vector<std::string> labels;

  std::size_t size() const { return heads.size(); }
  bool operator==(const DependencyTree&) const = default;
};

/// Tokens paired with their tree.
struct ParsedSentence {
  std::vector<std::string> tokens;
  DependencyTree tree;

  bool operator==(const ParsedSentence&) const = default;
};

/// Empty string if `tree` is a valid tree (heads in range, exactly one
/// root, acyclic, labels aligned), otherwise a description of the problem.
std::string tree_problem(const DependencyTree& tree);

bool is_valid_tree(const DependencyTree& tree);

/// True when no two arcs cross (arcs from the root start at position 0).
bool is_projective(const DependencyTree& tree);

/// Reattaches every root after the first one to the first root.
void normalize_single_root(DependencyTree& tree);

/// Lifts non-projective arcs until the tree is projective. Each round lifts
/// the shortest non-projective arc (leftmost on ties) one step: its
/// dependent is reattached to the grandparent.
DependencyTree projectivize(const DependencyTree& tree);

/// children[h] lists the dependents of h in surface order; index 0 is the root.
std::vector<std::vector<int>> children_of(const DependencyTree& tree);

/// True if `ancestor` dominates `node` (reflexive).
bool dominates(const DependencyTree& tree, int ancestor, int node);

}  // namespace sawr::depparse
