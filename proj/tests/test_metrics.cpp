#include <algorithm>
#include <chrono>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "facet/metrics.hpp"

using namespace facet;

namespace {

const std::set<std::string> kC1 = {"A", "B", "C"};
const std::set<std::string> kC2 = {"D", "E", "F"};
const std::vector<std::string> kIds = {"A", "B", "C", "D", "E", "F"};

// Independent brute-force oracle: try both matchings explicitly.
struct OracleResult {
  GoldSide side;
  int correct, incorrect, missing;
  double cov;
};

OracleResult coverage_oracle(const std::set<std::string>& pred,
                             const std::set<std::string>& c1,
                             const std::set<std::string>& c2) {
  auto eval = [&](const std::set<std::string>& gold) {
    int correct = 0;
    for (const auto& id : pred)
      if (gold.count(id)) ++correct;
    int incorrect = static_cast<int>(pred.size()) - correct;
    int missing = static_cast<int>(gold.size()) - correct;
    int denom = correct + incorrect + missing;
    double cov = denom == 0 ? 0.0 : static_cast<double>(correct) / denom;
    return std::tuple<int, int, int, double>(correct, incorrect, missing, cov);
  };
  auto [cor1, inc1, mis1, cov1] = eval(c1);
  auto [cor2, inc2, mis2, cov2] = eval(c2);
  if (cor1 > cor2) return {GoldSide::c1, cor1, inc1, mis1, cov1};
  if (cor2 > cor1) return {GoldSide::c2, cor2, inc2, mis2, cov2};
  // overlap tie: higher coverage wins, then c1
  if (cov2 > cov1) return {GoldSide::c2, cor2, inc2, mis2, cov2};
  return {GoldSide::c1, cor1, inc1, mis1, cov1};
}

std::set<std::string> subset_from_mask(unsigned mask) {
  std::set<std::string> s;
  for (int bit = 0; bit < 6; ++bit)
    if (mask & (1u << bit)) s.insert(kIds[bit]);
  return s;
}

}  // namespace

TEST_CASE("coverage equals brute-force oracle on all 64 subsets, fast") {
  auto start = std::chrono::steady_clock::now();
  for (unsigned mask = 0; mask < 64; ++mask) {
    auto pred = subset_from_mask(mask);
    auto got = coverage(pred, kC1, kC2);
    auto want = coverage_oracle(pred, kC1, kC2);
    CAPTURE(mask);
    CHECK(got.matched_gold == want.side);
    CHECK(got.correct == want.correct);
    CHECK(got.incorrect == want.incorrect);
    CHECK(got.missing == want.missing);
    CHECK(got.coverage == doctest::Approx(want.cov).epsilon(1e-12));
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  CHECK(elapsed < 1000);
}

TEST_CASE("coverage worked examples") {
  CHECK(coverage({"A", "B", "C"}, kC1, kC2).coverage == doctest::Approx(1.0));

  auto half = coverage({"A", "B", "D"}, kC1, kC2);
  CHECK(half.matched_gold == GoldSide::c1);
  CHECK(half.correct == 2);
  CHECK(half.incorrect == 1);
  CHECK(half.missing == 1);
  CHECK(half.coverage == doctest::Approx(0.5));

  CHECK(coverage(std::set<std::string>{}, kC1, kC2).coverage == 0.0);

  auto all = coverage({"A", "B", "C", "D", "E", "F"}, kC1, kC2);
  CHECK(all.correct == 3);
  CHECK(all.incorrect == 3);
  CHECK(all.missing == 0);
  CHECK(all.coverage == doctest::Approx(0.5));
}

TEST_CASE("coverage is invariant under relabeling of user ids") {
  // relabel A..F -> P..U consistently
  std::map<std::string, std::string> relabel = {{"A", "P"}, {"B", "Q"}, {"C", "R"},
                                                {"D", "S"}, {"E", "T"}, {"F", "U"}};
  auto map_set = [&](const std::set<std::string>& in) {
    std::set<std::string> out;
    for (const auto& id : in) out.insert(relabel.at(id));
    return out;
  };
  for (unsigned mask = 0; mask < 64; ++mask) {
    auto pred = subset_from_mask(mask);
    auto before = coverage(pred, kC1, kC2);
    auto after = coverage(map_set(pred), map_set(kC1), map_set(kC2));
    CHECK(before.coverage == doctest::Approx(after.coverage).epsilon(1e-12));
    CHECK(before.correct == after.correct);
  }
}

TEST_CASE("dual coverage worked examples") {
  CommunityPrediction exact;
  exact.community = kC1;
  exact.remainder = kC2;
  CHECK(dual_coverage(exact, kC1, kC2) == doctest::Approx(1.0));

  CommunityPrediction mixed;
  mixed.community = {"A", "B", "D"};
  mixed.remainder = {"C", "E", "F"};
  CHECK(dual_coverage(mixed, kC1, kC2) == doctest::Approx(0.5));

  CommunityPrediction empty;
  empty.remainder = {"A", "B", "C", "D", "E", "F"};
  CHECK(dual_coverage(empty, kC1, kC2) == doctest::Approx(0.25));
}

TEST_CASE("dual coverage is invariant to swapping gold communities") {
  for (unsigned mask = 0; mask < 64; ++mask) {
    CommunityPrediction pred;
    pred.community = subset_from_mask(mask);
    for (const auto& id : kIds)
      if (!pred.community.count(id)) pred.remainder.insert(id);
    CHECK(dual_coverage(pred, kC1, kC2) ==
          doctest::Approx(dual_coverage(pred, kC2, kC1)).epsilon(1e-12));
  }
}

TEST_CASE("coverage rejects malformed gold partitions") {
  CHECK_THROWS_AS(coverage({"A"}, {"A", "B"}, {"C", "D", "E"}), ValidationError);
  CHECK_THROWS_AS(coverage({"A"}, {"A", "B", "C"}, {"C", "D", "E"}),
                  ValidationError);
}

TEST_CASE("dataset coverage scales to [0,100] with 2-decimal rounding") {
  CHECK(dataset_coverage({1.0, 0.5}) == doctest::Approx(75.00));
  CHECK(dataset_coverage({1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(33.33));
  CHECK_THROWS(dataset_coverage({}));
}

TEST_CASE("accuracy and macro F1 worked examples") {
  std::vector<std::string> classes = {"high", "mixed", "low"};

  auto perfect = accuracy_macro_f1({"high", "low", "mixed"},
                                   {"high", "low", "mixed"}, classes);
  CHECK(perfect.first == doctest::Approx(1.0));
  CHECK(perfect.second == doctest::Approx(1.0));

  // gold [h,h,l,m], pred [h,l,l,m]
  auto mixed = accuracy_macro_f1({"high", "low", "low", "mixed"},
                                 {"high", "high", "low", "mixed"}, classes);
  CHECK(mixed.first == doctest::Approx(0.75));
  CHECK(mixed.second == doctest::Approx((2.0 / 3 + 2.0 / 3 + 1.0) / 3));

  // all predictions one class on balanced gold
  auto degenerate = accuracy_macro_f1({"high", "high", "high"},
                                      {"high", "mixed", "low"}, classes);
  CHECK(degenerate.first == doctest::Approx(1.0 / 3));
  CHECK(degenerate.second == doctest::Approx(0.5 / 3));

  CHECK_THROWS(accuracy_macro_f1({"bogus"}, {"high"}, classes));
  CHECK_THROWS(accuracy_macro_f1({"high", "low"}, {"high"}, classes));
}
