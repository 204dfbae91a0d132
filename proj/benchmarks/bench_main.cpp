#include <random>
#include <set>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "facet/gateway.hpp"
#include "facet/metrics.hpp"
#include "facet/rewards.hpp"

namespace {

const std::set<std::string> kC1 = {"u1", "u2", "u3"};
const std::set<std::string> kC2 = {"u4", "u5", "u6"};
const std::vector<std::string> kIds = {"u1", "u2", "u3", "u4", "u5", "u6"};

void BM_Coverage(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::set<std::string>> preds;
  for (int i = 0; i < 64; ++i) {
    std::set<std::string> pred;
    for (const auto& id : kIds)
      if (rng() % 2) pred.insert(id);
    preds.push_back(std::move(pred));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        facet::coverage(preds[i++ % preds.size()], kC1, kC2));
  }
}
BENCHMARK(BM_Coverage);

void BM_ParseCommunityResponse(benchmark::State& state) {
  const std::string raw =
      "The tight community is user_1, user_3 and user_5 because they all "
      "discuss the same bill ;;;;; user_2, user_4, user_6 and maybe user_9";
  for (auto _ : state) {
    benchmark::DoNotOptimize(facet::parse_community_response(raw, kIds));
  }
}
BENCHMARK(BM_ParseCommunityResponse);

void BM_RougeReward(benchmark::State& state) {
  facet::FocusArea gen{
      "Focus on the strict gun control measures debated in the senate this "
      "week and the advocacy groups behind them.",
      facet::FocusSource::rl_model};
  facet::FocusArea gold{
      "Focus on gun control and the groups lobbying the senate.",
      facet::FocusSource::gold_llm};
  for (auto _ : state) {
    benchmark::DoNotOptimize(facet::rouge_reward(gen, gold));
  }
}
BENCHMARK(BM_RougeReward);

void BM_Rf2(benchmark::State& state) {
  facet::DiscriminativeEntitySet des;
  for (int i = 0; i < 50; ++i) des.entities.insert("entity_" + std::to_string(i));
  facet::FocusArea focus{
      "Focus on entity_3, entity_17 and entity_42 plus unrelated topics.",
      facet::FocusSource::rl_model};
  for (auto _ : state) {
    benchmark::DoNotOptimize(facet::rf2(focus, des));
  }
}
BENCHMARK(BM_Rf2);

}  // namespace

BENCHMARK_MAIN();
