#include "sawr/data/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "sawr/errors.hpp"

namespace sawr::data {

Vocabulary::Vocabulary() {
  for (const char* t : {"<pad>", "<unk>", "<s>", "</s>"}) add(t);
}

TokenId Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= static_cast<TokenId>(tokens_.size())) {
    throw InvalidArgument("token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode(const Sentence& sentence) const {
  std::vector<TokenId> ids;
  ids.reserve(sentence.size());
  for (const auto& w : sentence) ids.push_back(id(w));
  return ids;
}

Sentence Vocabulary::decode(const std::vector<TokenId>& ids) const {
  Sentence out;
  for (TokenId i : ids) {
    if (i == kEos) break;
    if (i == kPad || i == kBos) continue;
    out.push_back(token(i));
  }
  return out;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = kReserved; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write vocabulary " + path);
  save(out);
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError("empty vocabulary entry", line_no);
    const std::size_t before = v.size();
    v.add(line);
    if (v.size() == before) throw ParseError("duplicate vocabulary entry '" + line + "'", line_no);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open vocabulary " + path);
  return load(in);
}

Vocabulary build_vocab(const std::vector<Sentence>& corpus, std::size_t max_size, std::size_t min_count) {
  if (max_size <= static_cast<std::size_t>(Vocabulary::kReserved)) {
    throw InvalidArgument("build_vocab: max_size must exceed the 4 reserved ids");
  }
  struct Entry {
    std::string token;
    std::size_t count;
    std::size_t first;
  };
  std::vector<Entry> entries;
  std::unordered_map<std::string, std::size_t> where;
  std::size_t tokens = 0;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) {
      auto [it, fresh] = where.emplace(w, entries.size());
      if (fresh) entries.push_back({w, 0, tokens});
      ++entries[it->second].count;
      ++tokens;
    }
  }
  if (tokens == 0) throw InvalidArgument("build_vocab: empty corpus");
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.count > b.count; });
  Vocabulary v;
  for (const auto& e : entries) {
    if (v.size() >= max_size || e.count < min_count) break;
    v.add(e.token);
  }
  return v;
}

}  // namespace sawr::data
