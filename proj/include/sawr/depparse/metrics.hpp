#pragma once

#include <vector>

#include "sawr/depparse/tree.hpp"

namespace sawr::depparse {

struct AttachmentScores {
  double uas = 0;
  double las = 0;
  long tokens = 0;
};

/// Token-level unlabeled and labeled attachment scores. Throws
/// InvalidArgument when the lists or any sentence pair differ in length.
AttachmentScores evaluate_las(const std::vector<DependencyTree>& pred, const std::vector<DependencyTree>& gold);

}  // namespace sawr::depparse
