#pragma once

#include <array>
#include <string>
#include <vector>

#include "sawr/data/vocab.hpp"

namespace sawr::eval {

using data::Sentence;

/// Sufficient statistics for corpus BLEU; they add over sentences.
struct BleuStats {
  std::array<long, 4> correct{};  // clipped n-gram matches, n = 1..4
  std::array<long, 4> total{};    // hypothesis n-grams
  long hyp_len = 0;
  long ref_len = 0;

  BleuStats& operator+=(const BleuStats& o);
};

struct BleuReport {
  double bleu = 0;  // in [0, 100]
  std::array<double, 4> precisions{};  // in [0, 1]
  double brevity_penalty = 0;
  long hyp_len = 0;
  long ref_len = 0;

  double ratio() const { return ref_len ? static_cast<double>(hyp_len) / static_cast<double>(ref_len) : 0.0; }
};

BleuStats sentence_stats(const Sentence& hyp, const Sentence& ref, bool case_sensitive = false);

/// Un-smoothed corpus BLEU, multi-bleu convention: BLEU is 0 as soon as
/// one order has no match (or no n-grams at all); BP = exp(1 - r/c) when
/// c < r.
BleuReport bleu_from_stats(const BleuStats& stats);

/// Corpus BLEU over tokenized sentences with one reference each. Case is
/// folded (ASCII) unless `case_sensitive`. Throws InvalidArgument when the
/// list lengths differ.
BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs, bool case_sensitive = false);

/// "BLEU = 27.31, 60.1/33.0/20.4/12.9 (BP=1.000, ratio=1.020, hyp_len=510, ref_len=500)"
std::string to_string(const BleuReport& report);

}  // namespace sawr::eval
