#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "facet/config.hpp"
#include "facet/gateway.hpp"
#include "facet/metrics.hpp"
#include "facet/rewards.hpp"
#include "facet/trainer.hpp"
#include "facet/types.hpp"

namespace facet {

// Synthetic sextets for fixture pipelines: each sample has one entity per
// gold community, mentioned by every user on that side.
struct FixtureDataset {
  std::vector<SampleSextet> samples;
  std::vector<std::string> entities;  // dictionary for the fixture extractor
};

FixtureDataset make_fixture_dataset(int n, std::uint64_t seed);

// Scripted task backend over the fixture entities:
//   summarize      -> echoes the user's texts as "The user mentions ..."
//   detect         -> community quality scales with the number of fixture
//                     entities named in the focus area (0: no community,
//                     1: one member swapped, 2+: exact gold community)
//   gen_gold_focus -> "Focus on <first community's entity>."
//   make_informative -> appends detail so augmented texts are longer
std::shared_ptr<ScriptedMockBackend> make_fixture_backend(
    std::vector<std::string> entities);

// Fixture dataset + scripted backend + reward plumbing shared by the CLI and
// the integration tests.
class FixtureWorld {
 public:
  FixtureWorld(int n, std::uint64_t seed);

  const std::vector<SampleSextet>& samples() const { return fixture_.samples; }
  std::vector<const SampleSextet*> split(Split s) const;
  Backend& backend() const { return *backend_; }
  const TemplateStore& templates() const { return templates_; }
  const EntityExtractor& extractor() const { return extractor_; }

  std::vector<std::string> summaries(const SampleSextet& sample,
                                     const std::vector<std::string>& order) const;
  // Policy input text: presentation-order summaries joined by newlines.
  std::string policy_input(const SampleSextet& sample) const;
  const SampleSextet& sample_for_input(const std::string& input) const;

  std::vector<std::string> focus_candidates(const SampleSextet& sample) const;
  FocusArea gold_focus(const SampleSextet& sample) const;

  CommunityPrediction detect(const SampleSextet& sample,
                             const FocusArea& focus) const;
  RewardVector reward(const SampleSextet& sample, const std::string& focus_text,
                      const InformativenessScorer* scorer = nullptr) const;

  double dataset_coverage_with_focus(
      const std::vector<const SampleSextet*>& samples,
      const std::function<FocusArea(const SampleSextet&)>& provider) const;

  std::vector<SlPair> sl_pairs(const std::vector<const SampleSextet*>& samples) const;
  RlTask rl_task(const std::vector<const SampleSextet*>& train,
                 const std::vector<const SampleSextet*>& val,
                 const InformativenessScorer* scorer = nullptr) const;

 private:
  FixtureDataset fixture_;
  std::shared_ptr<ScriptedMockBackend> backend_;
  TemplateStore templates_;
  EntityExtractor extractor_;
  mutable std::map<std::string, std::string> summary_cache_;
  std::map<std::string, const SampleSextet*> by_input_;
};

// Per-sample coverage rows plus an aggregate summary.
struct EvalResult {
  std::string csv;             // sample_id,matched_gold,correct,incorrect,missing,coverage
  std::string aggregate_json;  // {"dataset_coverage": ..., "num_samples": ...}
  double dataset_cov = 0.0;
};

EvalResult evaluate_dataset(
    const std::vector<SampleSextet>& samples, Backend& backend,
    const TemplateStore& templates,
    const std::function<FocusArea(const SampleSextet&)>& focus_provider);

// Deterministic run manifest: seed, config hash, and a digest per output
// file. No timestamps, so identical runs produce identical manifests.
void write_manifest(const std::filesystem::path& dir,
                    const std::string& config_hash, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& outputs);

// build fixture dataset -> scripted summarize -> detect -> eval, writing
// dataset.jsonl, summaries.jsonl, eval.csv, eval.json, manifest.json.
void run_fixture_pipeline(const std::filesystem::path& out_dir, int n,
                          std::uint64_t seed);

}  // namespace facet
