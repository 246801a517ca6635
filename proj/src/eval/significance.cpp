#include "sawr/eval/significance.hpp"

#include "sawr/errors.hpp"
#include "sawr/random.hpp"

namespace sawr::eval {

SignificanceResult bootstrap_significance(const std::vector<Sentence>& hyps_a, const std::vector<Sentence>& hyps_b,
                                          const std::vector<Sentence>& refs, int samples, std::uint64_t seed,
                                          bool case_sensitive) {
  if (hyps_a.size() != refs.size() || hyps_b.size() != refs.size()) {
    throw InvalidArgument("bootstrap_significance: system outputs and references differ in length");
  }
  if (refs.empty()) throw InvalidArgument("bootstrap_significance: empty test set");
  if (samples < 100) throw InvalidArgument("bootstrap_significance: need at least 100 samples");

  const std::size_t n = refs.size();
  std::vector<BleuStats> a(n);
  std::vector<BleuStats> b(n);
  BleuStats full_a;
  BleuStats full_b;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = sentence_stats(hyps_a[i], refs[i], case_sensitive);
    b[i] = sentence_stats(hyps_b[i], refs[i], case_sensitive);
    full_a += a[i];
    full_b += b[i];
  }

  SignificanceResult r;
  r.samples = samples;
  r.bleu_a = bleu_from_stats(full_a).bleu;
  r.bleu_b = bleu_from_stats(full_b).bleu;
  for (int s = 0; s < samples; ++s) {
    Rng rng = Rng::derive(seed, static_cast<std::uint64_t>(s));
    BleuStats sa;
    BleuStats sb;
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<std::size_t>(rng.index(n));
      sa += a[i];
      sb += b[i];
    }
    const double x = bleu_from_stats(sa).bleu;
    const double y = bleu_from_stats(sb).bleu;
    if (x > y) {
      ++r.wins_a;
    } else if (y > x) {
      ++r.wins_b;
    } else {
      ++r.ties;
    }
  }
  const int worse_wins = r.bleu_a >= r.bleu_b ? r.wins_b : r.wins_a;
  r.p_value = static_cast<double>(worse_wins + r.ties) / samples;
  return r;
}

}  // namespace sawr::eval
