#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sawr/depparse/tree.hpp"

namespace sawr::depparse {

enum class TreebankFormat {
  conll10,  // ID FORM LEMMA CPOSTAG POSTAG FEATS HEAD DEPREL PHEAD PDEPREL
  conll4,   // ID FORM HEAD DEPREL
};

/// Reads tab-separated CoNLL-style sentences separated by blank lines.
///
/// Lines starting with '#' are comments. Each line is interpreted by its own
/// column count: 10 columns (CoNLL-X / CoNLL-U, multiword "1-2" and empty
/// "1.1" nodes skipped) or 4 columns. Throws ParseError with the line
/// number for malformed lines and DataError naming the sentence index for
/// out-of-range heads or cycles. Sentences with several roots are
/// normalized to a single root.
std::vector<ParsedSentence> read_treebank(std::istream& in);
std::vector<ParsedSentence> read_treebank(const std::string& path);

void write_treebank(std::ostream& out, const std::vector<ParsedSentence>& sentences,
                    TreebankFormat format = TreebankFormat::conll10);
void write_treebank(const std::string& path, const std::vector<ParsedSentence>& sentences,
                    TreebankFormat format = TreebankFormat::conll10);

}  // namespace sawr::depparse
