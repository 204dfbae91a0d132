#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "facet/policy.hpp"
#include "facet/rewards.hpp"
#include "facet/types.hpp"

namespace facet {

struct SlConfig {
  int max_prompt_len = 650;
  int epochs = 120;
  double lr = 1e-5;
  double weight_decay = 0.01;
};

struct RlConfig {
  double lr = 1e-4;
  double entropy_coef = 0.1;
  double target_kl = 3.0;
  double clip_ratio = 0.2;
  int batch_size = 8;
  int update_epochs = 4;
  int iterations = 100;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  SlConfig sl;
  RlConfig rl;
  int patience = 3;
};

// ---------------------------------------------------------------------------
// Curriculum

struct CurriculumState {
  int phase = 0;
  std::vector<RewardId> active_rewards = {RewardId::rf1};
  int stall_counter = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, double>> val_history;  // (step, value)

  std::string to_json() const;
  static CurriculumState from_json(const std::string& text);
};

// Strict-improvement tracker. After `patience` consecutive non-improving
// validation scores the next reward in [rf1, rf2, rf3, rf4] is activated and
// best_val tracking restarts for the new phase. Active rewards are never
// removed.
CurriculumState curriculum_step(CurriculumState state, double val_score,
                                int patience = 3);

// ---------------------------------------------------------------------------
// Supervised training

struct SlPair {
  std::string input;
  std::optional<std::string> target;
};

struct SlResult {
  double initial_nll = 0.0;
  double final_nll = 0.0;
  std::vector<double> epoch_train_nll;
  std::vector<double> epoch_val_nll;
  int skipped = 0;
};

// Maximizes target log-likelihood; retains the best-validation snapshot when
// a validation set is given. Pairs without a target are skipped with a
// warning; an effectively empty corpus is an error.
SlResult train_supervised(PolicyModel& policy, const std::vector<SlPair>& train,
                          const SlConfig& cfg,
                          const std::vector<SlPair>& val = {});

// ---------------------------------------------------------------------------
// RL training

struct RlTask {
  std::vector<std::string> train_inputs;
  std::vector<std::string> val_inputs;
  // Component rewards for one generated output; may throw BackendError, in
  // which case the sample is retried once then skipped.
  std::function<RewardVector(const std::string& input, const std::string& output)>
      reward;
};

struct RlResult {
  CurriculumState curriculum;
  std::vector<double> val_scores;
  double final_train_reward = 0.0;
  int updates_run = 0;
  int lr_halvings = 0;
};

// KL-regularized PPO with clipped surrogate, entropy bonus, and curriculum
// reward activation. The reference policy is a frozen copy of the input
// policy. Deterministic under a fixed seed at parallelism 1.
RlResult train_rl(PolicyModel& policy, const RlTask& task,
                  CurriculumState curriculum, const TrainConfig& cfg,
                  const std::filesystem::path* checkpoint_dir = nullptr);

}  // namespace facet
