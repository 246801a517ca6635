#pragma once

#include <cstdint>
#include <vector>

#include "sawr/eval/bleu.hpp"

namespace sawr::eval {

struct SignificanceResult {
  double p_value = 1;
  double bleu_a = 0;  // on the full test set
  double bleu_b = 0;
  int wins_a = 0;  // resamples where A scores strictly higher
  int wins_b = 0;
  int ties = 0;
  int samples = 0;
};

/// Paired bootstrap resampling. Each of `samples` resamples draws sentence
/// indices with replacement (resample i uses Rng::derive(seed, i)) and
/// scores both systems on it. p is the fraction of resamples in which the
/// system that is worse on the full set wins or ties; with equal full-set
/// scores, B is treated as the worse system.
SignificanceResult bootstrap_significance(const std::vector<Sentence>& hyps_a, const std::vector<Sentence>& hyps_b,
                                          const std::vector<Sentence>& refs, int samples = 1000,
                                          std::uint64_t seed = 1, bool case_sensitive = false);

}  // namespace sawr::eval
