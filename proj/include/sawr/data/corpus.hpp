#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sawr/data/vocab.hpp"

namespace sawr::data {

/// Splits on ASCII whitespace.
Sentence tokenize(const std::string& line);
std::string join(const Sentence& tokens);

/// One whitespace-tokenized sentence per line (UTF-8).
std::vector<Sentence> read_sentences(const std::string& path);
void write_sentences(const std::string& path, const std::vector<Sentence>& sentences);

/// Two line-aligned files. Throws DataError when line counts differ.
std::vector<std::pair<Sentence, Sentence>> read_parallel(const std::string& src_path, const std::string& tgt_path);

}  // namespace sawr::data
