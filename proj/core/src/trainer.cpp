#include "facet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include <json.hpp>

namespace facet {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Curriculum

std::string CurriculumState::to_json() const {
  json j;
  j["phase"] = phase;
  json active = json::array();
  for (RewardId id : active_rewards) active.push_back(to_string(id));
  j["active_rewards"] = active;
  j["stall_counter"] = stall_counter;
  j["best_val"] = std::isinf(best_val) ? json() : json(best_val);
  json hist = json::array();
  for (const auto& [step, value] : val_history)
    hist.push_back({{"step", step}, {"value", value}});
  j["val_history"] = hist;
  return j.dump();
}

CurriculumState CurriculumState::from_json(const std::string& text) {
  json j = json::parse(text);
  CurriculumState s;
  s.phase = j.at("phase").get<int>();
  s.active_rewards.clear();
  for (const auto& id : j.at("active_rewards"))
    s.active_rewards.push_back(reward_id_from_string(id.get<std::string>()));
  s.stall_counter = j.at("stall_counter").get<int>();
  s.best_val = j.at("best_val").is_null()
                   ? -std::numeric_limits<double>::infinity()
                   : j.at("best_val").get<double>();
  for (const auto& h : j.at("val_history"))
    s.val_history.emplace_back(h.at("step").get<int>(),
                               h.at("value").get<double>());
  return s;
}

CurriculumState curriculum_step(CurriculumState state, double val_score,
                                int patience) {
  int step = state.val_history.empty() ? 0 : state.val_history.back().first + 1;
  state.val_history.emplace_back(step, val_score);

  if (val_score > state.best_val) {
    state.best_val = val_score;
    state.stall_counter = 0;
    return state;
  }
  state.stall_counter = std::min(state.stall_counter + 1, patience);
  if (state.stall_counter >= patience &&
      state.active_rewards.size() < kRewardOrder.size()) {
    state.active_rewards.push_back(kRewardOrder[state.active_rewards.size()]);
    ++state.phase;
    state.stall_counter = 0;
    // The combined-reward scale changes with the active set, so the
    // improvement tracker restarts for the new phase.
    state.best_val = -std::numeric_limits<double>::infinity();
  }
  return state;
}

// ---------------------------------------------------------------------------
// Supervised training

namespace {

double mean_nll(const PolicyModel& policy, const std::vector<SlPair>& pairs) {
  double sum = 0.0;
  int n = 0;
  for (const auto& pair : pairs) {
    if (!pair.target) continue;
    sum -= policy.sequence_logprob(pair.input, *pair.target);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

SlResult train_supervised(PolicyModel& policy, const std::vector<SlPair>& train,
                          const SlConfig& cfg, const std::vector<SlPair>& val) {
  SlResult result;
  std::vector<SlPair> usable;
  for (const auto& pair : train) {
    if (!pair.target) {
      std::cerr << "warning: skipping sample without gold focus area\n";
      ++result.skipped;
      continue;
    }
    usable.push_back(pair);
  }
  if (usable.empty())
    throw std::invalid_argument("no training pairs with gold focus areas");

  for (const auto& pair : usable) policy.observe(pair.input, *pair.target);
  for (const auto& pair : val)
    if (pair.target) policy.observe(pair.input, *pair.target);

  result.initial_nll = mean_nll(policy, usable);

  double best_val_nll = std::numeric_limits<double>::infinity();
  std::string best_snapshot;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& pair : usable) {
      policy.accumulate_grad(pair.input, *pair.target, 1.0);
      policy.gradient_step(cfg.lr, cfg.weight_decay);
    }
    result.epoch_train_nll.push_back(mean_nll(policy, usable));
    if (!val.empty()) {
      double val_nll = mean_nll(policy, val);
      result.epoch_val_nll.push_back(val_nll);
      if (val_nll < best_val_nll) {
        best_val_nll = val_nll;
        best_snapshot = policy.snapshot();
      }
    }
  }
  if (!best_snapshot.empty()) policy.restore(best_snapshot);
  result.final_nll = mean_nll(policy, usable);
  return result;
}

// ---------------------------------------------------------------------------
// RL training

namespace {

double policy_kl(const PolicyModel& policy, const PolicyModel& reference,
                 const std::string& input) {
  std::vector<double> lp = policy.action_logprobs(input);
  std::vector<double> ref_lp = reference.action_logprobs(input);
  std::size_t n = std::min(lp.size(), ref_lp.size());
  double kl = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    kl += std::exp(lp[a]) * (lp[a] - ref_lp[a]);
  return std::max(0.0, kl);
}

double mean_kl(const PolicyModel& policy, const PolicyModel& reference,
               const std::set<std::string>& inputs) {
  if (inputs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& input : inputs) sum += policy_kl(policy, reference, input);
  return sum / inputs.size();
}

}  // namespace

RlResult train_rl(PolicyModel& policy, const RlTask& task,
                  CurriculumState curriculum, const TrainConfig& cfg,
                  const std::filesystem::path* checkpoint_dir) {
  if (task.train_inputs.empty())
    throw std::invalid_argument("train_rl with no training inputs");

  std::unique_ptr<PolicyModel> reference = policy.clone();
  std::mt19937_64 rng(cfg.rl.seed);
  double lr = cfg.rl.lr;
  double kl_coef = 0.1;  // adaptive, targets cfg.rl.target_kl

  RlResult result;
  result.curriculum = curriculum;

  struct Rollout {
    std::string input;
    std::string output;
    double old_logprob = 0.0;
    double reward = 0.0;
  };

  for (int iteration = 0; iteration < cfg.rl.iterations; ++iteration) {
    std::string iteration_start = policy.snapshot();

    // Rollout collection.
    std::vector<Rollout> batch;
    for (int b = 0; b < cfg.rl.batch_size; ++b) {
      const std::string& input =
          task.train_inputs[rng() % task.train_inputs.size()];
      DecodeParams params;
      params.greedy = false;
      params.seed = rng();
      std::string output = policy.generate(input, params);

      RewardVector rv;
      bool ok = false;
      for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
        try {
          rv = task.reward(input, output);
          ok = true;
        } catch (const BackendError& e) {
          if (attempt == 1)
            std::cerr << "warning: dropping rollout after retry: " << e.what()
                      << "\n";
        }
      }
      if (!ok) continue;
      Rollout r;
      r.input = input;
      r.output = output;
      r.old_logprob = policy.sequence_logprob(input, output);
      r.reward = combine_rewards(rv, result.curriculum.active_rewards);
      batch.push_back(std::move(r));
    }
    if (batch.empty()) continue;

    double mean_reward = 0.0;
    for (const auto& r : batch) mean_reward += r.reward;
    mean_reward /= batch.size();
    result.final_train_reward = mean_reward;

    std::set<std::string> batch_inputs;
    for (const auto& r : batch) batch_inputs.insert(r.input);

    // PPO update epochs with clipped surrogate, entropy bonus, and KL
    // penalty against the frozen reference. An epoch whose step would push
    // the measured KL past target_kl is rolled back and ends the update.
    double measured = 0.0;
    for (int epoch = 0; epoch < cfg.rl.update_epochs; ++epoch) {
      std::string pre_step = policy.snapshot();

      for (const auto& r : batch) {
        double advantage = r.reward - mean_reward;
        double ratio =
            std::exp(policy.sequence_logprob(r.input, r.output) - r.old_logprob);
        bool clipped = (advantage >= 0 && ratio > 1.0 + cfg.rl.clip_ratio) ||
                       (advantage < 0 && ratio < 1.0 - cfg.rl.clip_ratio);
        double coef = clipped ? 0.0 : advantage * ratio;
        policy.accumulate_grad(r.input, r.output, coef / batch.size());
      }
      for (const auto& input : batch_inputs) {
        std::vector<std::string> cands = policy.candidates(input);
        std::vector<double> lp = policy.action_logprobs(input);
        std::vector<double> ref_lp = reference->action_logprobs(input);
        std::size_t n = std::min({cands.size(), lp.size(), ref_lp.size()});
        for (std::size_t a = 0; a < n; ++a) {
          double p = std::exp(lp[a]);
          double coef = cfg.rl.entropy_coef * (-p * (lp[a] + 1.0)) -
                        kl_coef * p * (lp[a] - ref_lp[a]);
          policy.accumulate_grad(input, cands[a], coef / batch_inputs.size());
        }
      }
      policy.gradient_step(lr);

      measured = mean_kl(policy, *reference, batch_inputs);
      if (measured > cfg.rl.target_kl) {
        policy.restore(pre_step);
        measured = mean_kl(policy, *reference, batch_inputs);
        break;
      }
    }

    // Divergence guard.
    if (measured > 10.0 * cfg.rl.target_kl) {
      policy.restore(iteration_start);
      lr *= 0.5;
      ++result.lr_halvings;
    }
    if (measured > 1.5 * cfg.rl.target_kl)
      kl_coef *= 2.0;
    else if (measured < cfg.rl.target_kl / 1.5)
      kl_coef = std::max(1e-4, kl_coef * 0.5);

    // Validation and curriculum advance.
    double val_score;
    if (!task.val_inputs.empty()) {
      double sum = 0.0;
      int n = 0;
      for (const auto& input : task.val_inputs) {
        std::string output = policy.generate(input, DecodeParams{});
        try {
          RewardVector rv = task.reward(input, output);
          sum += combine_rewards(rv, result.curriculum.active_rewards);
          ++n;
        } catch (const BackendError&) {
        }
      }
      val_score = n > 0 ? sum / n : 0.0;
    } else {
      val_score = mean_reward;
    }
    result.curriculum = curriculum_step(result.curriculum, val_score,
                                        cfg.patience);
    result.val_scores.push_back(val_score);
    ++result.updates_run;

    if (checkpoint_dir) {
      std::filesystem::path step_dir =
          *checkpoint_dir / ("step_" + std::to_string(iteration));
      std::filesystem::create_directories(step_dir);
      std::ofstream(step_dir / "policy.json") << policy.snapshot();
      std::ofstream(step_dir / "curriculum.json") << result.curriculum.to_json();
      std::ofstream metrics(*checkpoint_dir / "metrics.csv", std::ios::app);
      if (iteration == 0)
        metrics << "step,val_score,mean_reward,kl,active_rewards\n";
      metrics << iteration << "," << val_score << "," << mean_reward << ","
              << measured << ",";
      for (std::size_t i = 0; i < result.curriculum.active_rewards.size(); ++i)
        metrics << (i ? "+" : "")
                << to_string(result.curriculum.active_rewards[i]);
      metrics << "\n";
    }
  }
  return result;
}

}  // namespace facet
