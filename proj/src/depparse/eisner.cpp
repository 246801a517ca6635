#include "sawr/depparse/eisner.hpp"

#include <cmath>
#include <cstdlib>

#include "sawr/errors.hpp"

namespace sawr::depparse {

namespace {

// Lexicographic objective: score first, then the tie-break penalties.
struct Key {
  double score = 0;
  long head_sum = 0;
  long length_sum = 0;

  Key operator+(const Key& o) const { return {score + o.score, head_sum + o.head_sum, length_sum + o.length_sum}; }
  bool better_than(const Key& o) const {
    if (score != o.score) return score > o.score;
    if (head_sum != o.head_sum) return head_sum < o.head_sum;
    return length_sum < o.length_sum;
  }
};

struct Cell {
  Key key;
  int split = -1;
  bool set = false;

  void offer(const Key& k, int q) {
    if (!set || k.better_than(key)) {
      key = k;
      split = q;
      set = true;
    }
  }
};

class Chart {
 public:
  explicit Chart(int n) : n_(n), cells_(static_cast<std::size_t>((n + 1) * (n + 1) * 4)) {}
  // kind: 0 incomplete right (s->t), 1 incomplete left (t->s),
  //       2 complete right (head s), 3 complete left (head t)
  Cell& at(int s, int t, int kind) { return cells_[static_cast<std::size_t>(((s * (n_ + 1)) + t) * 4 + kind)]; }

 private:
  int n_;
  std::vector<Cell> cells_;
};

enum { kIncRight = 0, kIncLeft = 1, kCompRight = 2, kCompLeft = 3 };

void backtrack(Chart& chart, int s, int t, int kind, std::vector<int>& heads) {
  if (s == t) return;
  const int q = chart.at(s, t, kind).split;
  switch (kind) {
    case kIncRight:
      heads[static_cast<std::size_t>(t - 1)] = s;
      backtrack(chart, s, q, kCompRight, heads);
      backtrack(chart, q + 1, t, kCompLeft, heads);
      break;
    case kIncLeft:
      heads[static_cast<std::size_t>(s - 1)] = t;
      backtrack(chart, s, q, kCompRight, heads);
      backtrack(chart, q + 1, t, kCompLeft, heads);
      break;
    case kCompRight:
      backtrack(chart, s, q, kIncRight, heads);
      backtrack(chart, q, t, kCompRight, heads);
      break;
    default:
      backtrack(chart, s, q, kCompLeft, heads);
      backtrack(chart, q, t, kIncLeft, heads);
      break;
  }
}

}  // namespace

double tree_score(const ArcScores& scores, const DependencyTree& tree) {
  double total = 0;
  for (std::size_t i = 0; i < tree.size(); ++i) total += scores.arc(tree.heads[i], static_cast<int>(i) + 1);
  return total;
}

DependencyTree decode_projective(const ArcScores& scores) {
  const int n = scores.size();
  if (n == 0) throw InvalidArgument("decode_projective: empty sentence");
  if (scores.arcs.rows() != n + 1) throw ShapeError("decode_projective: arc matrix must be (n+1) x n");
  for (int h = 0; h <= n; ++h) {
    for (int d = 1; d <= n; ++d) {
      if (h != d && !std::isfinite(scores.arc(h, d))) {
        throw InvalidArgument("decode_projective: non-finite score for arc " + std::to_string(h) + "->" +
                              std::to_string(d));
      }
    }
  }
  auto arc_key = [&](int h, int d) { return Key{scores.arc(h, d), h, std::abs(h - d)}; };

  Chart chart(n);
  for (int s = 1; s <= n; ++s) {
    for (int kind = 0; kind < 4; ++kind) chart.at(s, s, kind).offer(Key{}, s);
  }
  for (int width = 1; width < n; ++width) {
    for (int s = 1; s + width <= n; ++s) {
      const int t = s + width;
      for (int q = s; q < t; ++q) {
        const Key inner = chart.at(s, q, kCompRight).key + chart.at(q + 1, t, kCompLeft).key;
        chart.at(s, t, kIncRight).offer(inner + arc_key(s, t), q);
        chart.at(s, t, kIncLeft).offer(inner + arc_key(t, s), q);
      }
      for (int q = s + 1; q <= t; ++q) {
        chart.at(s, t, kCompRight).offer(chart.at(s, q, kIncRight).key + chart.at(q, t, kCompRight).key, q);
      }
      for (int q = s; q < t; ++q) {
        chart.at(s, t, kCompLeft).offer(chart.at(s, q, kCompLeft).key + chart.at(q, t, kIncLeft).key, q);
      }
    }
  }

  Cell root;
  for (int r = 1; r <= n; ++r) {
    root.offer(chart.at(1, r, kCompLeft).key + chart.at(r, n, kCompRight).key + arc_key(0, r), r);
  }
  const int r = root.split;
  std::vector<int> heads(static_cast<std::size_t>(n), -1);
  heads[static_cast<std::size_t>(r - 1)] = 0;
  backtrack(chart, 1, r, kCompLeft, heads);
  backtrack(chart, r, n, kCompRight, heads);

  DependencyTree tree;
  tree.heads = std::move(heads);
  if (!scores.labels.empty()) {
    tree.labels.reserve(static_cast<std::size_t>(n));
    for (int d = 1; d <= n; ++d) {
      const int h = tree.heads[static_cast<std::size_t>(d - 1)];
      std::size_t best = 0;
      for (std::size_t l = 1; l < scores.labels.size(); ++l) {
        if (scores.labels[l](h, d - 1) > scores.labels[best](h, d - 1)) best = l;
      }
      tree.labels.push_back(scores.label_names.at(best));
    }
  }
  return tree;
}

}  // namespace sawr::depparse
