#include "sawr/data/bpe.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "sawr/errors.hpp"

namespace sawr::data {

namespace {

bool has_marker(const std::string& unit) {
  return unit.size() >= 2 && unit.compare(unit.size() - 2, 2, kBpeMarker) == 0;
}

}  // namespace

std::vector<std::string> utf8_chars(const std::string& word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > word.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

BpeModel::BpeModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

std::vector<std::string> BpeModel::segment_word(const std::string& word) const {
  auto units = utf8_chars(word);
  while (units.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < units.size(); ++i) {
      auto it = rank_.find({units[i], units[i + 1]});
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    const auto& [left, right] = merges_[best_rank];
    std::vector<std::string> next;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (i + 1 < units.size() && units[i] == left && units[i + 1] == right) {
        next.push_back(left + right);
        ++i;
      } else {
        next.push_back(units[i]);
      }
    }
    units = std::move(next);
  }
  return units;
}

Sentence BpeModel::apply(const Sentence& words) const {
  Sentence out;
  for (const auto& w : words) {
    auto units = segment_word(w);
    for (std::size_t i = 0; i < units.size(); ++i) out.push_back(i + 1 < units.size() ? units[i] + kBpeMarker : units[i]);
  }
  return out;
}

void BpeModel::save(std::ostream& out) const {
  for (const auto& [l, r] : merges_) out << l << ' ' << r << '\n';
}

void BpeModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write BPE model " + path);
  save(out);
}

BpeModel BpeModel::load(std::istream& in) {
  std::vector<Merge> merges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 >= line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      throw ParseError("BPE merge must be two space-separated units", line_no);
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  return BpeModel(std::move(merges));
}

BpeModel BpeModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open BPE model " + path);
  return load(in);
}

BpeModel learn_bpe(const std::map<std::string, long>& counts, std::size_t num_merges) {
  struct Word {
    std::vector<std::string> units;
    long count;
  };
  std::vector<Word> words;
  for (const auto& [w, c] : counts) {
    if (c > 0 && !w.empty()) words.push_back({utf8_chars(w), c});
  }
  std::vector<BpeModel::Merge> merges;
  while (merges.size() < num_merges) {
    std::map<BpeModel::Merge, long> pairs;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.units.size(); ++i) pairs[{w.units[i], w.units[i + 1]}] += w.count;
    }
    // std::map iterates in lexicographic order, so the first maximum wins ties.
    const BpeModel::Merge* best = nullptr;
    long best_count = 1;
    for (const auto& [pair, c] : pairs) {
      if (c > best_count) {
        best = &pair;
        best_count = c;
      }
    }
    if (!best) break;
    const auto merge = *best;
    merges.push_back(merge);
    for (auto& w : words) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < w.units.size(); ++i) {
        if (i + 1 < w.units.size() && w.units[i] == merge.first && w.units[i + 1] == merge.second) {
          next.push_back(merge.first + merge.second);
          ++i;
        } else {
          next.push_back(w.units[i]);
        }
      }
      w.units = std::move(next);
    }
  }
  return BpeModel(std::move(merges));
}

std::map<std::string, long> word_counts(const std::vector<Sentence>& corpus) {
  std::map<std::string, long> counts;
  for (const auto& s : corpus) {
    for (const auto& w : s) ++counts[w];
  }
  return counts;
}

Sentence decode_bpe(const Sentence& units) {
  Sentence out;
  std::string pending;
  bool open = false;
  for (const auto& u : units) {
    if (has_marker(u)) {
      pending += u.substr(0, u.size() - 2);
      open = true;
    } else {
      out.push_back(pending + u);
      pending.clear();
      open = false;
    }
  }
  if (open) out.push_back(pending);
  return out;
}

}  // namespace sawr::data
