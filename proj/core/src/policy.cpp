#include "facet/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace facet {

using nlohmann::json;

double PolicyModel::sequence_logprob(const std::string& input,
                                     const std::string& output) const {
  double sum = 0.0;
  for (double lp : token_logprobs(input, output)) sum += lp;
  return sum;
}

CandidatePolicy::CandidatePolicy(std::vector<std::string> shared_candidates)
    : shared_candidates_(std::move(shared_candidates)) {}

CandidatePolicy::State& CandidatePolicy::state_for(const std::string& input) {
  auto it = states_.find(input);
  if (it == states_.end()) {
    State s;
    s.candidates = shared_candidates_;
    s.logits.assign(s.candidates.size(), 0.0);
    s.grad.assign(s.candidates.size(), 0.0);
    it = states_.emplace(input, std::move(s)).first;
  }
  return it->second;
}

const CandidatePolicy::State* CandidatePolicy::find_state(
    const std::string& input) const {
  auto it = states_.find(input);
  if (it != states_.end()) return &it->second;
  return nullptr;
}

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
  double max = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - max);
  double log_z = max + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

}  // namespace

std::string CandidatePolicy::generate(const std::string& input,
                                      const DecodeParams& params) {
  State& s = state_for(input);
  if (s.candidates.empty())
    throw std::runtime_error("no candidates registered for input");
  if (params.greedy) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.logits.size(); ++i)
      if (s.logits[i] > s.logits[best]) best = i;
    return s.candidates[best];
  }
  std::vector<double> logits = s.logits;
  if (params.temperature != 1.0)
    for (double& l : logits) l /= params.temperature;
  std::vector<double> logp = log_softmax(logits);
  std::mt19937_64 rng(params.seed);
  double u = (rng() >> 11) * 0x1.0p-53;  // uniform in [0,1)
  double acc = 0.0;
  for (std::size_t i = 0; i < logp.size(); ++i) {
    acc += std::exp(logp[i]);
    if (u < acc) return s.candidates[i];
  }
  return s.candidates.back();
}

std::vector<double> CandidatePolicy::token_logprobs(
    const std::string& input, const std::string& output) const {
  const State* s = find_state(input);
  if (!s) {
    // Unseen input: uniform over the shared candidate list.
    auto it = std::find(shared_candidates_.begin(), shared_candidates_.end(),
                        output);
    if (it == shared_candidates_.end() || shared_candidates_.empty())
      return {-1e9};
    return {-std::log(static_cast<double>(shared_candidates_.size()))};
  }
  auto it = std::find(s->candidates.begin(), s->candidates.end(), output);
  if (it == s->candidates.end()) return {-1e9};
  std::vector<double> logp = log_softmax(s->logits);
  return {logp[static_cast<std::size_t>(it - s->candidates.begin())]};
}

void CandidatePolicy::observe(const std::string& input,
                              const std::string& output) {
  State& s = state_for(input);
  if (std::find(s.candidates.begin(), s.candidates.end(), output) !=
      s.candidates.end())
    return;
  s.candidates.push_back(output);
  s.logits.push_back(0.0);
  s.grad.push_back(0.0);
}

std::vector<std::string> CandidatePolicy::candidates(
    const std::string& input) const {
  const State* s = find_state(input);
  return s ? s->candidates : shared_candidates_;
}

std::vector<double> CandidatePolicy::action_logprobs(
    const std::string& input) const {
  const State* s = find_state(input);
  if (s) return log_softmax(s->logits);
  return log_softmax(std::vector<double>(shared_candidates_.size(), 0.0));
}

void CandidatePolicy::accumulate_grad(const std::string& input,
                                      const std::string& output, double coef) {
  State& s = state_for(input);
  auto it = std::find(s.candidates.begin(), s.candidates.end(), output);
  if (it == s.candidates.end())
    throw std::runtime_error("accumulate_grad for unknown candidate");
  std::size_t target = static_cast<std::size_t>(it - s.candidates.begin());
  std::vector<double> logp = log_softmax(s.logits);
  // d log p_target / d logit_b = delta(target, b) - p_b
  for (std::size_t b = 0; b < s.logits.size(); ++b) {
    double delta = (b == target ? 1.0 : 0.0) - std::exp(logp[b]);
    s.grad[b] += coef * delta;
  }
}

void CandidatePolicy::gradient_step(double lr, double weight_decay) {
  for (auto& [input, s] : states_) {
    for (std::size_t i = 0; i < s.logits.size(); ++i) {
      s.logits[i] += lr * (s.grad[i] - weight_decay * s.logits[i]);
      s.grad[i] = 0.0;
    }
  }
}

std::string CandidatePolicy::snapshot() const {
  json j;
  j["shared_candidates"] = shared_candidates_;
  json states = json::object();
  for (const auto& [input, s] : states_) {
    states[input] = {{"candidates", s.candidates}, {"logits", s.logits}};
  }
  j["states"] = states;
  return j.dump();
}

void CandidatePolicy::restore(const std::string& state) {
  json j = json::parse(state);
  shared_candidates_ = j.at("shared_candidates").get<std::vector<std::string>>();
  states_.clear();
  for (const auto& [input, js] : j.at("states").items()) {
    State s;
    s.candidates = js.at("candidates").get<std::vector<std::string>>();
    s.logits = js.at("logits").get<std::vector<double>>();
    s.grad.assign(s.logits.size(), 0.0);
    states_.emplace(input, std::move(s));
  }
}

std::unique_ptr<PolicyModel> CandidatePolicy::clone() const {
  auto copy = std::make_unique<CandidatePolicy>();
  copy->restore(snapshot());
  return copy;
}

}  // namespace facet
