#include "sawr/data/corpus.hpp"

#include <fstream>
#include <sstream>

#include "sawr/errors.hpp"

namespace sawr::data {

Sentence tokenize(const std::string& line) {
  Sentence out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string join(const Sentence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<Sentence> read_sentences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open " + path);
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(tokenize(line));
  return out;
}

void write_sentences(const std::string& path, const std::vector<Sentence>& sentences) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write " + path);
  for (const auto& s : sentences) out << join(s) << '\n';
}

std::vector<std::pair<Sentence, Sentence>> read_parallel(const std::string& src_path, const std::string& tgt_path) {
  auto src = read_sentences(src_path);
  auto tgt = read_sentences(tgt_path);
  if (src.size() != tgt.size()) {
    throw DataError("parallel corpus mismatch: " + std::to_string(src.size()) + " source vs " +
                    std::to_string(tgt.size()) + " target lines");
  }
  std::vector<std::pair<Sentence, Sentence>> out;
  out.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out.emplace_back(std::move(src[i]), std::move(tgt[i]));
  return out;
}

}  // namespace sawr::data
