#pragma once

#include <string>
#include <vector>

#include "sawr/depparse/tree.hpp"

namespace sawr::data {

/// Bracketed depth-first rendering of a dependency tree. Each node emits
/// "(" + label, its left dependents, its word, its right dependents, then
/// ")", so a sentence of n words becomes 3n symbols:
///
///   a <- b -> c  ==>  (root (dep_a a ) b (dep_c c ) )
///
/// Unlabeled trees use "dep". Throws InvalidArgument for invalid trees and
/// for words that would read as an opening bracket ("(" followed by more
/// characters).
std::vector<std::string> linearize_tree(const std::vector<std::string>& tokens, const depparse::DependencyTree& tree);

/// Inverse of linearize_tree. Throws InvalidArgument on malformed input.
depparse::ParsedSentence delinearize(const std::vector<std::string>& symbols);

/// True for symbols that open a node.
bool is_open_bracket(const std::string& symbol);

}  // namespace sawr::data
