#include "sawr/depparse/treebank.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "sawr/errors.hpp"

namespace sawr::depparse {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

int parse_int(const std::string& s, std::size_t line, const char* what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  return v;
}

void finish_sentence(std::vector<ParsedSentence>& out, ParsedSentence& current) {
  if (current.tokens.empty()) return;
  const std::size_t index = out.size();
  const int n = static_cast<int>(current.tokens.size());
  for (int h : current.tree.heads) {
    if (h < 0 || h > n) {
      throw DataError("sentence " + std::to_string(index) + ": head " + std::to_string(h) + " out of range");
    }
  }
  normalize_single_root(current.tree);
  if (auto problem = tree_problem(current.tree); !problem.empty()) {
    throw DataError("sentence " + std::to_string(index) + ": " + problem);
  }
  out.push_back(std::move(current));
  current = ParsedSentence{};
}

}  // namespace

std::vector<ParsedSentence> read_treebank(std::istream& in) {
  std::vector<ParsedSentence> out;
  ParsedSentence current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(out, current);
      continue;
    }
    if (line[0] == '#') continue;
    auto cols = split_tabs(line);
    std::size_t head_col = 0;
    std::size_t label_col = 0;
    if (cols.size() == 10) {
      if (cols[0].find_first_of("-.") != std::string::npos) continue;
      head_col = 6;
      label_col = 7;
    } else if (cols.size() == 4) {
      head_col = 2;
      label_col = 3;
    } else {
      throw ParseError("expected 4 or 10 tab-separated columns, got " + std::to_string(cols.size()), line_no);
    }
    const int id = parse_int(cols[0], line_no, "token index");
    if (id != static_cast<int>(current.tokens.size()) + 1) throw ParseError("token indices must count up from 1", line_no);
    if (cols[1].empty()) throw ParseError("empty word form", line_no);
    current.tokens.push_back(cols[1]);
    current.tree.heads.push_back(parse_int(cols[head_col], line_no, "head"));
    current.tree.labels.push_back(cols[label_col]);
  }
  finish_sentence(out, current);
  return out;
}

std::vector<ParsedSentence> read_treebank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open treebank " + path);
  return read_treebank(in);
}

void write_treebank(std::ostream& out, const std::vector<ParsedSentence>& sentences, TreebankFormat format) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const std::string& label = i < s.tree.labels.size() ? s.tree.labels[i] : std::string("_");
      if (format == TreebankFormat::conll10) {
        out << i + 1 << '\t' << s.tokens[i] << "\t_\t_\t_\t_\t" << s.tree.heads[i] << '\t' << label << "\t_\t_\n";
      } else {
        out << i + 1 << '\t' << s.tokens[i] << '\t' << s.tree.heads[i] << '\t' << label << '\n';
      }
    }
    out << '\n';
  }
}

void write_treebank(const std::string& path, const std::vector<ParsedSentence>& sentences, TreebankFormat format) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write treebank " + path);
  write_treebank(out, sentences, format);
}

}  // namespace sawr::depparse
