#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace facet {

struct DecodeParams {
  bool greedy = true;
  double temperature = 1.0;
  std::uint64_t seed = 0;  // used only when greedy == false
};

// Trainable text-to-text policy. The production target would wrap a real
// encoder-decoder model; tests use the tabular softmax implementation below.
// Updates are expressed as sums of c_i * grad(log pi(output_i | input_i)),
// which covers likelihood, policy-gradient, entropy, and KL terms.
class PolicyModel {
 public:
  virtual ~PolicyModel() = default;

  virtual std::string generate(const std::string& input,
                               const DecodeParams& params) = 0;
  virtual std::vector<double> token_logprobs(const std::string& input,
                                             const std::string& output) const = 0;
  double sequence_logprob(const std::string& input,
                          const std::string& output) const;

  // Registers an output as generatable for the input (used by supervised
  // training to introduce targets).
  virtual void observe(const std::string& input, const std::string& output) = 0;

  virtual std::vector<std::string> candidates(const std::string& input) const = 0;
  virtual std::vector<double> action_logprobs(const std::string& input) const = 0;

  virtual void accumulate_grad(const std::string& input,
                               const std::string& output, double coef) = 0;
  virtual void gradient_step(double lr, double weight_decay = 0.0) = 0;

  virtual std::string snapshot() const = 0;
  virtual void restore(const std::string& state) = 0;
  virtual std::unique_ptr<PolicyModel> clone() const = 0;
};

// Softmax policy over a per-input candidate list: one logit per
// (input, candidate). Greedy decoding breaks ties by candidate order.
class CandidatePolicy : public PolicyModel {
 public:
  CandidatePolicy() = default;
  // Same candidate list shared by every input seen later.
  explicit CandidatePolicy(std::vector<std::string> shared_candidates);

  std::string generate(const std::string& input,
                       const DecodeParams& params) override;
  std::vector<double> token_logprobs(const std::string& input,
                                     const std::string& output) const override;
  void observe(const std::string& input, const std::string& output) override;
  std::vector<std::string> candidates(const std::string& input) const override;
  std::vector<double> action_logprobs(const std::string& input) const override;
  void accumulate_grad(const std::string& input, const std::string& output,
                       double coef) override;
  void gradient_step(double lr, double weight_decay = 0.0) override;
  std::string snapshot() const override;
  void restore(const std::string& state) override;
  std::unique_ptr<PolicyModel> clone() const override;

 private:
  struct State {
    std::vector<std::string> candidates;
    std::vector<double> logits;
    std::vector<double> grad;
  };
  std::vector<std::string> shared_candidates_;
  std::map<std::string, State> states_;

  State& state_for(const std::string& input);
  const State* find_state(const std::string& input) const;
};

}  // namespace facet
