#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "facet/policy.hpp"
#include "facet/trainer.hpp"

using namespace facet;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Curriculum

TEST_CASE("curriculum activates rf2 at the third stalled evaluation") {
  CurriculumState state;
  std::vector<double> trace = {0.40, 0.41, 0.41, 0.41, 0.41};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    state = curriculum_step(state, trace[i], 3);
    if (i < 4) {
      CHECK(state.active_rewards == std::vector<RewardId>{RewardId::rf1});
    }
  }
  CHECK(state.active_rewards ==
        std::vector<RewardId>{RewardId::rf1, RewardId::rf2});
  CHECK(state.phase == 1);
  CHECK(state.stall_counter == 0);
  CHECK(std::isinf(state.best_val));  // per-phase reset
  CHECK(state.val_history.size() == 5);
}

TEST_CASE("curriculum never advances on strictly increasing scores") {
  CurriculumState state;
  for (int i = 0; i < 50; ++i) state = curriculum_step(state, 0.1 + 0.01 * i, 3);
  CHECK(state.active_rewards == std::vector<RewardId>{RewardId::rf1});
  CHECK(state.phase == 0);
  CHECK(state.stall_counter == 0);
}

TEST_CASE("curriculum with all rewards active only saturates the counter") {
  CurriculumState state;
  state.active_rewards = kRewardOrder;
  state.phase = 3;
  state.best_val = 0.9;
  for (int i = 0; i < 10; ++i) state = curriculum_step(state, 0.5, 3);
  CHECK(state.active_rewards == kRewardOrder);
  CHECK(state.phase == 3);
  CHECK(state.stall_counter == 3);  // saturated at patience
}

TEST_CASE("curriculum equal score counts as a stall (strict improvement)") {
  CurriculumState state;
  state = curriculum_step(state, 0.5, 3);
  CHECK(state.stall_counter == 0);
  state = curriculum_step(state, 0.5, 3);
  CHECK(state.stall_counter == 1);
}

TEST_CASE("curriculum state JSON round-trip") {
  CurriculumState state;
  state = curriculum_step(state, 0.4, 3);
  state = curriculum_step(state, 0.4, 3);
  auto back = CurriculumState::from_json(state.to_json());
  CHECK(back.phase == state.phase);
  CHECK(back.active_rewards == state.active_rewards);
  CHECK(back.stall_counter == state.stall_counter);
  CHECK(back.best_val == state.best_val);
  CHECK(back.val_history == state.val_history);

  // fresh state round-trips the -inf best_val
  CurriculumState fresh;
  auto fresh_back = CurriculumState::from_json(fresh.to_json());
  CHECK(std::isinf(fresh_back.best_val));
}

// ---------------------------------------------------------------------------
// Candidate policy

TEST_CASE("candidate policy: greedy decode, logprobs, snapshot round-trip") {
  CandidatePolicy policy({"out_a", "out_b", "out_c"});
  policy.observe("in", "out_a");

  auto lp = policy.action_logprobs("in");
  REQUIRE(lp.size() == 3);
  for (double v : lp) CHECK(v == doctest::Approx(std::log(1.0 / 3)));

  policy.accumulate_grad("in", "out_b", 1.0);
  policy.gradient_step(5.0);
  CHECK(policy.generate("in", DecodeParams{}) == "out_b");

  std::string snap = policy.snapshot();
  policy.accumulate_grad("in", "out_c", 1.0);
  policy.gradient_step(50.0);
  CHECK(policy.generate("in", DecodeParams{}) == "out_c");
  policy.restore(snap);
  CHECK(policy.generate("in", DecodeParams{}) == "out_b");

  auto clone = policy.clone();
  CHECK(clone->generate("in", DecodeParams{}) == "out_b");
}

TEST_CASE("candidate policy: sampling is seeded and matches its distribution") {
  CandidatePolicy policy({"x", "y"});
  policy.observe("in", "x");
  DecodeParams params;
  params.greedy = false;
  params.seed = 42;
  auto first = policy.generate("in", params);
  CHECK(policy.generate("in", params) == first);

  int x_count = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    params.seed = s;
    x_count += policy.generate("in", params) == "x";
  }
  CHECK(x_count > 140);  // roughly uniform
  CHECK(x_count < 260);
}

// ---------------------------------------------------------------------------
// Supervised training

TEST_CASE("supervised training halves NLL and memorizes the toy corpus") {
  CandidatePolicy policy({"Focus on taxes.", "Focus on schools."});
  std::vector<SlPair> train = {{"summary one", std::string("Focus on taxes.")},
                               {"summary two", std::string("Focus on schools.")}};
  SlConfig cfg;
  cfg.epochs = 200;
  cfg.lr = 0.5;
  cfg.weight_decay = 0.0;

  auto result = train_supervised(policy, train, cfg);
  CHECK(result.initial_nll == doctest::Approx(std::log(2.0)));
  CHECK(result.final_nll < 0.5 * result.initial_nll);
  CHECK(policy.generate("summary one", DecodeParams{}) == "Focus on taxes.");
  CHECK(policy.generate("summary two", DecodeParams{}) == "Focus on schools.");
  CHECK(result.skipped == 0);
  CHECK(result.epoch_train_nll.size() == 200);
}

TEST_CASE("supervised training skips missing targets and errors when empty") {
  CandidatePolicy policy({"a", "b"});
  std::vector<SlPair> with_gap = {{"in1", std::string("a")}, {"in2", std::nullopt}};
  SlConfig cfg;
  cfg.epochs = 5;
  cfg.lr = 0.1;
  auto result = train_supervised(policy, with_gap, cfg);
  CHECK(result.skipped == 1);

  CandidatePolicy fresh({"a"});
  std::vector<SlPair> all_missing = {{"in1", std::nullopt}};
  CHECK_THROWS_AS(train_supervised(fresh, all_missing, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(train_supervised(fresh, {}, cfg), std::invalid_argument);
}

TEST_CASE("supervised training keeps the best-validation snapshot") {
  CandidatePolicy policy({"good", "bad"});
  std::vector<SlPair> train = {{"in", std::string("good")}};
  std::vector<SlPair> val = {{"in", std::string("good")}};
  SlConfig cfg;
  cfg.epochs = 50;
  cfg.lr = 0.3;
  cfg.weight_decay = 0.0;
  auto result = train_supervised(policy, train, cfg, val);
  REQUIRE(result.epoch_val_nll.size() == 50);
  double best = *std::min_element(result.epoch_val_nll.begin(),
                                  result.epoch_val_nll.end());
  // restored policy scores the best observed validation NLL
  double restored = -policy.sequence_logprob("in", "good");
  CHECK(restored == doctest::Approx(best).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// RL training

namespace {

RlTask bandit_task(double off_reward, double best_reward) {
  RlTask task;
  task.train_inputs = {"ctx"};
  task.reward = [off_reward, best_reward](const std::string&,
                                          const std::string& output) {
    RewardVector rv;
    rv.rf1_coverage = output == "candidate_d" ? best_reward : off_reward;
    return rv;
  };
  return task;
}

CandidatePolicy bandit_policy() {
  CandidatePolicy policy(
      {"candidate_a", "candidate_b", "candidate_c", "candidate_d"});
  policy.observe("ctx", "candidate_a");
  return policy;
}

double expected_raw_reward(const PolicyModel& policy, const RlTask& task) {
  auto cands = policy.candidates("ctx");
  auto lp = policy.action_logprobs("ctx");
  double expected = 0.0;
  for (std::size_t a = 0; a < cands.size(); ++a)
    expected += std::exp(lp[a]) * task.reward("ctx", cands[a]).rf1_coverage;
  return expected;
}

TrainConfig bandit_config(int iterations, std::uint64_t seed = 7) {
  TrainConfig cfg;
  cfg.rl.lr = 0.2;
  cfg.rl.batch_size = 16;
  cfg.rl.iterations = iterations;
  cfg.rl.seed = seed;
  cfg.patience = INT_MAX;  // single-phase: rf1 only
  return cfg;
}

}  // namespace

TEST_CASE("PPO bandit reaches expected reward >= 0.9 within 500 updates") {
  auto policy = bandit_policy();
  auto task = bandit_task(0.2, 1.0);
  auto start = std::chrono::steady_clock::now();
  auto result = train_rl(policy, task, CurriculumState{}, bandit_config(500));
  auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  CHECK(elapsed < 60);
  CHECK(result.updates_run <= 500);
  CHECK(expected_raw_reward(policy, task) >= 0.9);
  // curriculum untouched with infinite patience
  CHECK(result.curriculum.active_rewards == std::vector<RewardId>{RewardId::rf1});

  // KL to the frozen (uniform) reference stays within target
  auto reference = bandit_policy();
  auto lp = policy.action_logprobs("ctx");
  auto ref_lp = reference.action_logprobs("ctx");
  double kl = 0.0;
  for (std::size_t a = 0; a < lp.size(); ++a)
    kl += std::exp(lp[a]) * (lp[a] - ref_lp[a]);
  CHECK(kl <= 3.0);
}

TEST_CASE("uniform rewards keep the policy within TV 0.05 of the reference") {
  auto policy = bandit_policy();
  auto task = bandit_task(0.5, 0.5);  // reward constant across actions
  train_rl(policy, task, CurriculumState{}, bandit_config(200));

  auto reference = bandit_policy();
  auto lp = policy.action_logprobs("ctx");
  auto ref_lp = reference.action_logprobs("ctx");
  double tv = 0.0;
  for (std::size_t a = 0; a < lp.size(); ++a)
    tv += 0.5 * std::abs(std::exp(lp[a]) - std::exp(ref_lp[a]));
  CHECK(tv <= 0.05);
}

TEST_CASE("RL training is bit-identical under a fixed seed") {
  auto run = [] {
    auto policy = bandit_policy();
    auto result =
        train_rl(policy, bandit_task(0.2, 1.0), CurriculumState{},
                 bandit_config(50, 123));
    return std::pair<std::string, std::vector<double>>{policy.snapshot(),
                                                       result.val_scores};
  };
  auto first = run();
  auto second = run();
  CHECK(first.first == second.first);
  CHECK(first.second == second.second);
}

TEST_CASE("RL reward failures are retried once then the rollout is dropped") {
  auto policy = bandit_policy();
  RlTask task;
  task.train_inputs = {"ctx"};
  int calls = 0;
  task.reward = [&calls](const std::string&, const std::string& output) {
    ++calls;
    if (output == "candidate_a") throw BackendError("flaky");
    RewardVector rv;
    rv.rf1_coverage = 0.5;
    return rv;
  };
  auto result = train_rl(policy, task, CurriculumState{}, bandit_config(5));
  CHECK(result.updates_run >= 1);  // training survived the failures
  CHECK(calls > 0);
}

TEST_CASE("RL checkpoints: per-step policy + curriculum plus a metrics CSV") {
  auto dir = fs::temp_directory_path() / "facet_test_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto policy = bandit_policy();
  train_rl(policy, bandit_task(0.2, 1.0), CurriculumState{}, bandit_config(3),
           &dir);

  CHECK(fs::exists(dir / "step_0" / "policy.json"));
  CHECK(fs::exists(dir / "step_2" / "policy.json"));
  CHECK(fs::exists(dir / "step_2" / "curriculum.json"));
  CHECK(fs::exists(dir / "metrics.csv"));

  std::ifstream in(dir / "step_2" / "curriculum.json");
  std::stringstream buf;
  buf << in.rdbuf();
  auto state = CurriculumState::from_json(buf.str());
  CHECK_FALSE(state.active_rewards.empty());
}

TEST_CASE("RL curriculum advances when validation plateaus") {
  // Constant reward => constant val score => stall from the second eval on.
  auto policy = bandit_policy();
  RlTask task = bandit_task(0.6, 0.6);
  task.val_inputs = {"ctx"};
  TrainConfig cfg = bandit_config(6);
  cfg.patience = 3;
  auto result = train_rl(policy, task, CurriculumState{}, cfg);
  // evals: improve, stall, stall, stall -> activate rf2 at iteration 4
  REQUIRE(result.curriculum.active_rewards.size() >= 2);
  CHECK(result.curriculum.active_rewards[1] == RewardId::rf2);
}

TEST_CASE("train_rl rejects empty input sets") {
  auto policy = bandit_policy();
  RlTask task;
  task.reward = [](const std::string&, const std::string&) {
    return RewardVector{};
  };
  CHECK_THROWS_AS(
      train_rl(policy, task, CurriculumState{}, bandit_config(1)),
      std::invalid_argument);
}
