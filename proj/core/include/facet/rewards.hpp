#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "facet/gateway.hpp"
#include "facet/types.hpp"

namespace facet {

// Pluggable entity extractor; production would use an NER model, tests and
// fixtures use a dictionary extractor.
using EntityExtractor =
    std::function<std::vector<std::string>(const std::string&)>;

// Dictionary extractor: returns one hit per occurrence of a known entity
// (case-insensitive substring match).
EntityExtractor dictionary_extractor(std::vector<std::string> entities);

struct DiscriminativeEntitySet {
  std::set<std::string> entities;  // normalized (lowercased, trimmed)
  std::map<std::string, std::pair<int, int>> per_community_counts;
};

std::string normalize_entity(const std::string& raw);

// Entities kept iff mentioned more than once within at least one gold
// community's summaries, and strictly more often in one community than the
// other.
DiscriminativeEntitySet discriminative_entities(
    const std::vector<std::string>& c1_summaries,
    const std::vector<std::string>& c2_summaries, const EntityExtractor& ner);

// RF1: dual coverage of the prediction against the gold communities.
double rf1(const CommunityPrediction& pred, const std::set<std::string>& gold_c1,
           const std::set<std::string>& gold_c2);

// RF2: min(1, f_e / 3) where f_e counts distinct discriminative entities
// mentioned in the focus area.
double rf2(const FocusArea& focus, const DiscriminativeEntitySet& des);

// RF4: 0.5 below 10 words, 1.0 above 35, linear in between.
double rf4(const FocusArea& focus);

int word_count(const std::string& text);

// ROUGE-L F-measure over whitespace tokens.
double rouge_reward(const FocusArea& generated, const FocusArea& gold);

// ---------------------------------------------------------------------------
// RF3: informativeness scorer (binary logistic regression)

struct LabeledText {
  std::string text;
  int label = 0;  // 1 = informative
};

// Gold focus areas become negatives; backend-augmented versions positives.
// Degenerate pairs (augmentation identical to the gold text) are dropped;
// backend failures skip the pair with a warning on stderr.
std::vector<LabeledText> build_informativeness_corpus(
    const std::vector<FocusArea>& gold_focus_areas, Backend& backend,
    const TemplateStore& templates);

inline constexpr int kInformativenessFeatureVersion = 1;

// Hashed unigram/bigram presence plus word-count and entity-count features.
class InformativenessScorer {
 public:
  InformativenessScorer();

  double score(const std::string& text) const;  // probability in [0,1]
  double score(const FocusArea& focus) const { return score(focus.text); }

  void save(const std::filesystem::path& path) const;
  static InformativenessScorer load(const std::filesystem::path& path);

  // The extractor is not serialized; callers of load() must supply the same
  // one used at training time for scores to match.
  void set_extractor(EntityExtractor ner) { ner_ = std::move(ner); }

  int feature_version() const { return kInformativenessFeatureVersion; }

  friend InformativenessScorer rf3_train(const std::vector<LabeledText>& corpus,
                                         const EntityExtractor& ner, int epochs,
                                         double lr);

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  EntityExtractor ner_;

  std::vector<std::pair<std::size_t, double>> features(
      const std::string& text) const;
};

InformativenessScorer rf3_train(const std::vector<LabeledText>& corpus,
                                const EntityExtractor& ner = nullptr,
                                int epochs = 300, double lr = 0.5);

inline double rf3_score(const InformativenessScorer& scorer,
                        const FocusArea& focus) {
  return scorer.score(focus);
}

// ---------------------------------------------------------------------------
// Combination

enum class RewardId { rf1, rf2, rf3, rf4 };

std::string to_string(RewardId id);
RewardId reward_id_from_string(const std::string& s);

// The full activation order used by the curriculum.
inline const std::vector<RewardId> kRewardOrder = {RewardId::rf1, RewardId::rf2,
                                                   RewardId::rf3, RewardId::rf4};

double reward_component(const RewardVector& v, RewardId id);

// combined = 0.25 * rouge + 0.75 * mean(active components)
double combine_rewards(const RewardVector& components,
                       const std::vector<RewardId>& active);

}  // namespace facet
