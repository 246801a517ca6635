#include "sawr/data/linearize.hpp"

#include "sawr/errors.hpp"

namespace sawr::data {

bool is_open_bracket(const std::string& symbol) { return symbol.size() > 1 && symbol[0] == '('; }

namespace {

void emit(int node, const std::vector<std::string>& tokens, const depparse::DependencyTree& tree,
          const std::vector<std::vector<int>>& kids, std::vector<std::string>& out) {
  const auto i = static_cast<std::size_t>(node - 1);
  out.push_back("(" + (tree.labels.empty() ? std::string("dep") : tree.labels[i]));
  const auto& children = kids[static_cast<std::size_t>(node)];
  for (int c : children) {
    if (c < node) emit(c, tokens, tree, kids, out);
  }
  out.push_back(tokens[i]);
  for (int c : children) {
    if (c > node) emit(c, tokens, tree, kids, out);
  }
  out.push_back(")");
}

}  // namespace

std::vector<std::string> linearize_tree(const std::vector<std::string>& tokens, const depparse::DependencyTree& tree) {
  if (tokens.size() != tree.size()) throw InvalidArgument("linearize_tree: token/tree length mismatch");
  if (auto problem = depparse::tree_problem(tree); !problem.empty()) {
    throw InvalidArgument("linearize_tree: " + problem);
  }
  for (const auto& w : tokens) {
    if (is_open_bracket(w)) throw InvalidArgument("linearize_tree: word '" + w + "' reads as a bracket");
  }
  for (const auto& l : tree.labels) {
    if (l.empty() || l.find_first_of(" \t") != std::string::npos) {
      throw InvalidArgument("linearize_tree: labels must be non-empty and space-free");
    }
  }
  auto kids = children_of(tree);
  std::vector<std::string> out;
  out.reserve(3 * tokens.size());
  emit(kids[0].front(), tokens, tree, kids, out);
  return out;
}

depparse::ParsedSentence delinearize(const std::vector<std::string>& symbols) {
  struct Open {
    int node;  // creation order
    bool has_word;
  };
  std::vector<std::string> labels_by_node;
  std::vector<int> parent_by_node;
  std::vector<int> word_of_node;
  std::vector<std::string> words;
  std::vector<Open> stack;
  int roots = 0;
  for (const auto& s : symbols) {
    if (is_open_bracket(s)) {
      if (stack.empty() && roots++ > 0) throw InvalidArgument("delinearize: more than one top-level node");
      const int node = static_cast<int>(labels_by_node.size());
      labels_by_node.push_back(s.substr(1));
      parent_by_node.push_back(stack.empty() ? -1 : stack.back().node);
      word_of_node.push_back(-1);
      stack.push_back({node, false});
    } else if (s == ")" && !stack.empty() && stack.back().has_word) {
      stack.pop_back();
    } else {
      if (stack.empty() || stack.back().has_word) throw InvalidArgument("delinearize: unexpected symbol '" + s + "'");
      word_of_node[static_cast<std::size_t>(stack.back().node)] = static_cast<int>(words.size());
      stack.back().has_word = true;
      words.push_back(s);
    }
  }
  if (!stack.empty() || words.empty()) throw InvalidArgument("delinearize: unbalanced brackets");
  depparse::ParsedSentence out;
  out.tokens = words;
  out.tree.heads.assign(words.size(), 0);
  out.tree.labels.assign(words.size(), "");
  for (std::size_t node = 0; node < labels_by_node.size(); ++node) {
    const auto w = static_cast<std::size_t>(word_of_node[node]);
    const int parent = parent_by_node[node];
    out.tree.heads[w] = parent < 0 ? 0 : word_of_node[static_cast<std::size_t>(parent)] + 1;
    out.tree.labels[w] = labels_by_node[node];
  }
  return out;
}

}  // namespace sawr::data
