#include "facet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace facet {

namespace {

void check_gold_partition(const std::set<std::string>& gold_c1,
                          const std::set<std::string>& gold_c2) {
  if (gold_c1.size() != 3 || gold_c2.size() != 3)
    throw ValidationError("gold communities must have 3 users each");
  std::set<std::string> overlap;
  std::set_intersection(gold_c1.begin(), gold_c1.end(), gold_c2.begin(),
                        gold_c2.end(), std::inserter(overlap, overlap.begin()));
  if (!overlap.empty())
    throw ValidationError("gold communities overlap");
}

CoverageBreakdown against(const std::set<std::string>& predicted,
                          const std::set<std::string>& gold, GoldSide side) {
  CoverageBreakdown b;
  b.matched_gold = side;
  for (const auto& id : predicted)
    gold.count(id) ? ++b.correct : ++b.incorrect;
  b.missing = static_cast<int>(gold.size()) - b.correct;
  int denom = b.correct + b.incorrect + b.missing;
  b.coverage = denom > 0 ? static_cast<double>(b.correct) / denom : 0.0;
  return b;
}

}  // namespace

CoverageBreakdown coverage(const std::set<std::string>& predicted,
                           const std::set<std::string>& gold_c1,
                           const std::set<std::string>& gold_c2) {
  check_gold_partition(gold_c1, gold_c2);
  CoverageBreakdown b1 = against(predicted, gold_c1, GoldSide::c1);
  CoverageBreakdown b2 = against(predicted, gold_c2, GoldSide::c2);
  if (b1.correct != b2.correct) return b1.correct > b2.correct ? b1 : b2;
  if (b1.coverage != b2.coverage) return b1.coverage > b2.coverage ? b1 : b2;
  return b1;  // full tie: c1
}

double dual_coverage(const CommunityPrediction& pred,
                     const std::set<std::string>& gold_c1,
                     const std::set<std::string>& gold_c2) {
  CoverageBreakdown primary = coverage(pred.community, gold_c1, gold_c2);
  CoverageBreakdown secondary = coverage(pred.remainder, gold_c1, gold_c2);
  return 0.5 * (primary.coverage + secondary.coverage);
}

double dataset_coverage(const std::vector<double>& per_sample_coverage) {
  if (per_sample_coverage.empty())
    throw std::invalid_argument("dataset_coverage on empty input");
  double sum = 0.0;
  for (double c : per_sample_coverage) sum += c;
  double mean = 100.0 * sum / per_sample_coverage.size();
  return std::round(mean * 100.0) / 100.0;
}

std::pair<double, double> accuracy_macro_f1(
    const std::vector<std::string>& pred_labels,
    const std::vector<std::string>& gold_labels,
    const std::vector<std::string>& classes) {
  if (pred_labels.size() != gold_labels.size())
    throw std::invalid_argument("label list length mismatch");
  if (pred_labels.empty())
    throw std::invalid_argument("empty label lists");

  auto known = [&](const std::string& label) {
    return std::find(classes.begin(), classes.end(), label) != classes.end();
  };

  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred_labels.size(); ++i) {
    if (!known(pred_labels[i]))
      throw std::invalid_argument("unknown predicted label: " + pred_labels[i]);
    if (!known(gold_labels[i]))
      throw std::invalid_argument("unknown gold label: " + gold_labels[i]);
    if (pred_labels[i] == gold_labels[i]) ++correct;
  }
  double accuracy = static_cast<double>(correct) / pred_labels.size();

  double f1_sum = 0.0;
  for (const auto& cls : classes) {
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < pred_labels.size(); ++i) {
      bool p = pred_labels[i] == cls;
      bool g = gold_labels[i] == cls;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    double f1 = (2 * tp + fp + fn) > 0
                    ? 2.0 * tp / (2.0 * tp + fp + fn)
                    : 0.0;
    f1_sum += f1;
  }
  return {accuracy, f1_sum / classes.size()};
}

}  // namespace facet
