#include "sawr/depparse/metrics.hpp"

#include "sawr/errors.hpp"

namespace sawr::depparse {

AttachmentScores evaluate_las(const std::vector<DependencyTree>& pred, const std::vector<DependencyTree>& gold) {
  if (pred.size() != gold.size()) throw InvalidArgument("evaluate_las: sentence counts differ");
  long total = 0;
  long heads = 0;
  long labeled = 0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw InvalidArgument("evaluate_las: length mismatch in sentence " + std::to_string(s));
    }
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      ++total;
      if (pred[s].heads[i] != gold[s].heads[i]) continue;
      ++heads;
      if (i < pred[s].labels.size() && i < gold[s].labels.size() && pred[s].labels[i] == gold[s].labels[i]) {
        ++labeled;
      }
    }
  }
  AttachmentScores out;
  out.tokens = total;
  if (total > 0) {
    out.uas = static_cast<double>(heads) / static_cast<double>(total);
    out.las = static_cast<double>(labeled) / static_cast<double>(total);
  }
  return out;
}

}  // namespace sawr::depparse
