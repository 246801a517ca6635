#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "sawr/depparse/tree.hpp"

namespace sawr::depparse {

/// Arc scores for one sentence of n tokens.
///
/// arcs is (n+1) x n: arcs(h, d-1) scores head h -> dependent d, h = 0 being
/// the virtual root. Self-arcs arcs(d, d-1) hold -infinity. labels, when
/// non-empty, has one matrix of the same shape per entry of label_names.
struct ArcScores {
  Eigen::MatrixXd arcs;
  std::vector<Eigen::MatrixXd> labels;
  std::vector<std::string> label_names;

  int size() const { return static_cast<int>(arcs.cols()); }
  double arc(int head, int dep) const { return arcs(head, dep - 1); }
};

/// Sum of arc scores of `tree` under `scores`.
double tree_score(const ArcScores& scores, const DependencyTree& tree);

/// Highest-scoring projective tree with exactly one dependent of the root
/// (first-order Eisner dynamic program, O(n^3)).
///
/// Ties between trees of equal score are broken by preferring the smaller
/// sum of head indices, then the smaller total arc length; any remaining
/// tie goes to the leftmost split point of the DP. With all scores equal
/// this yields token 1 as root with every other token attached to it. Labels are the
/// per-arc argmax (first label on ties). Throws InvalidArgument for n = 0
/// or non-finite off-diagonal scores.
DependencyTree decode_projective(const ArcScores& scores);

}  // namespace sawr::depparse
