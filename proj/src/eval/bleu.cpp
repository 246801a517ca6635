#include "sawr/eval/bleu.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "sawr/errors.hpp"

namespace sawr::eval {

namespace {

std::string fold(const std::string& s, bool case_sensitive) {
  if (case_sensitive) return s;
  std::string out = s;
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::map<std::vector<std::string>, long> ngrams(const std::vector<std::string>& words, std::size_t n) {
  std::map<std::vector<std::string>, long> counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) ++counts[{words.begin() + static_cast<long>(i),
                                                                words.begin() + static_cast<long>(i + n)}];
  return counts;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < 4; ++n) {
    correct[n] += o.correct[n];
    total[n] += o.total[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats sentence_stats(const Sentence& hyp, const Sentence& ref, bool case_sensitive) {
  std::vector<std::string> h;
  std::vector<std::string> r;
  for (const auto& w : hyp) h.push_back(fold(w, case_sensitive));
  for (const auto& w : ref) r.push_back(fold(w, case_sensitive));
  BleuStats s;
  s.hyp_len = static_cast<long>(h.size());
  s.ref_len = static_cast<long>(r.size());
  for (std::size_t n = 1; n <= 4; ++n) {
    auto ref_counts = ngrams(r, n);
    for (const auto& [gram, count] : ngrams(h, n)) {
      s.total[n - 1] += count;
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) s.correct[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

BleuReport bleu_from_stats(const BleuStats& stats) {
  BleuReport r;
  r.hyp_len = stats.hyp_len;
  r.ref_len = stats.ref_len;
  bool zero = false;
  double log_sum = 0;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] =
        stats.total[n] ? static_cast<double>(stats.correct[n]) / static_cast<double>(stats.total[n]) : 0.0;
    if (r.precisions[n] == 0) {
      zero = true;
    } else {
      log_sum += std::log(r.precisions[n]);
    }
  }
  if (stats.hyp_len == 0 || stats.ref_len == 0) return r;
  r.brevity_penalty = stats.hyp_len < stats.ref_len
                          ? std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len))
                          : 1.0;
  r.bleu = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4);
  return r;
}

BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs, bool case_sensitive) {
  if (hyps.size() != refs.size()) {
    throw InvalidArgument("bleu: " + std::to_string(hyps.size()) + " hypotheses vs " + std::to_string(refs.size()) +
                          " references");
  }
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += sentence_stats(hyps[i], refs[i], case_sensitive);
  return bleu_from_stats(total);
}

std::string to_string(const BleuReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%ld, ref_len=%ld)",
                r.bleu, 100 * r.precisions[0], 100 * r.precisions[1], 100 * r.precisions[2], 100 * r.precisions[3],
                r.brevity_penalty, r.ratio(), r.hyp_len, r.ref_len);
  return buf;
}

}  // namespace sawr::eval
