#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "facet/types.hpp"

namespace facet {

enum class GoldSide { c1, c2 };

struct CoverageBreakdown {
  GoldSide matched_gold = GoldSide::c1;
  int correct = 0;
  int incorrect = 0;
  int missing = 0;
  double coverage = 0.0;  // correct / (correct + incorrect + missing)
};

// Matches the prediction against the gold community with the larger overlap;
// ties go to the match with the higher coverage, then to c1.
CoverageBreakdown coverage(const std::set<std::string>& predicted,
                           const std::set<std::string>& gold_c1,
                           const std::set<std::string>& gold_c2);

inline CoverageBreakdown coverage(const CommunityPrediction& pred,
                                  const std::set<std::string>& gold_c1,
                                  const std::set<std::string>& gold_c2) {
  return coverage(pred.community, gold_c1, gold_c2);
}

// Mean coverage of the predicted community and its remainder, each matched
// independently to its own largest-overlap gold community.
double dual_coverage(const CommunityPrediction& pred,
                     const std::set<std::string>& gold_c1,
                     const std::set<std::string>& gold_c2);

// Mean per-sample coverage scaled to [0, 100], rounded to 2 decimals.
double dataset_coverage(const std::vector<double>& per_sample_coverage);

// 3-class accuracy and unweighted macro F1. Classes absent from both gold
// and predictions still contribute F1 = 0.
std::pair<double, double> accuracy_macro_f1(
    const std::vector<std::string>& pred_labels,
    const std::vector<std::string>& gold_labels,
    const std::vector<std::string>& classes);

}  // namespace facet
