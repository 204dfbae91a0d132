#include "facet/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "facet/dataset.hpp"
#include "facet/metrics.hpp"

namespace facet {

using nlohmann::json;

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string normalize_entity(const std::string& raw) {
  std::string s = lowercase(raw);
  auto first = s.find_first_not_of(" \t\n");
  auto last = s.find_last_not_of(" \t\n");
  return first == std::string::npos ? "" : s.substr(first, last - first + 1);
}

EntityExtractor dictionary_extractor(std::vector<std::string> entities) {
  std::vector<std::string> normalized;
  for (auto& e : entities) normalized.push_back(normalize_entity(e));
  return [normalized](const std::string& text) {
    std::string haystack = lowercase(text);
    std::vector<std::string> hits;
    for (const auto& entity : normalized) {
      if (entity.empty()) continue;
      std::size_t pos = 0;
      while ((pos = haystack.find(entity, pos)) != std::string::npos) {
        hits.push_back(entity);
        pos += entity.size();
      }
    }
    return hits;
  };
}

DiscriminativeEntitySet discriminative_entities(
    const std::vector<std::string>& c1_summaries,
    const std::vector<std::string>& c2_summaries, const EntityExtractor& ner) {
  std::map<std::string, std::pair<int, int>> counts;
  for (const auto& summary : c1_summaries)
    for (const auto& entity : ner(summary))
      ++counts[normalize_entity(entity)].first;
  for (const auto& summary : c2_summaries)
    for (const auto& entity : ner(summary))
      ++counts[normalize_entity(entity)].second;

  DiscriminativeEntitySet des;
  for (const auto& [entity, c] : counts) {
    bool repeated = c.first > 1 || c.second > 1;
    bool skewed = c.first != c.second;
    if (repeated && skewed) {
      des.entities.insert(entity);
      des.per_community_counts[entity] = c;
    }
  }
  return des;
}

double rf1(const CommunityPrediction& pred, const std::set<std::string>& gold_c1,
           const std::set<std::string>& gold_c2) {
  return dual_coverage(pred, gold_c1, gold_c2);
}

double rf2(const FocusArea& focus, const DiscriminativeEntitySet& des) {
  std::string text = lowercase(focus.text);
  int matched = 0;
  for (const auto& entity : des.entities)
    if (text.find(entity) != std::string::npos) ++matched;
  return std::min(1.0, matched / 3.0);
}

int word_count(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int count = 0;
  while (in >> word) ++count;
  return count;
}

double rf4(const FocusArea& focus) {
  int words = word_count(focus.text);
  if (words < 10) return 0.5;
  if (words > 35) return 1.0;
  return (words - 10) / 25.0 * 0.5 + 0.5;
}

double rouge_reward(const FocusArea& generated, const FocusArea& gold) {
  auto tokens = [](const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string word;
    while (in >> word) out.push_back(lowercase(word));
    return out;
  };
  std::vector<std::string> cand = tokens(generated.text);
  std::vector<std::string> ref = tokens(gold.text);
  if (cand.empty() || ref.empty()) return 0.0;

  std::vector<std::vector<int>> lcs(cand.size() + 1,
                                    std::vector<int>(ref.size() + 1, 0));
  for (std::size_t i = 1; i <= cand.size(); ++i)
    for (std::size_t j = 1; j <= ref.size(); ++j)
      lcs[i][j] = cand[i - 1] == ref[j - 1]
                      ? lcs[i - 1][j - 1] + 1
                      : std::max(lcs[i - 1][j], lcs[i][j - 1]);
  int l = lcs[cand.size()][ref.size()];
  if (l == 0) return 0.0;
  double precision = static_cast<double>(l) / cand.size();
  double recall = static_cast<double>(l) / ref.size();
  return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// RF3

std::vector<LabeledText> build_informativeness_corpus(
    const std::vector<FocusArea>& gold_focus_areas, Backend& backend,
    const TemplateStore& templates) {
  std::vector<LabeledText> corpus;
  for (const auto& gold : gold_focus_areas) {
    PromptRequest req = render_informative_prompt(gold, templates);
    std::string augmented;
    try {
      augmented = complete(req, backend).text;
    } catch (const BackendError& e) {
      std::cerr << "warning: skipping informativeness pair: " << e.what()
                << "\n";
      continue;
    }
    if (augmented == gold.text) continue;  // no learning signal
    corpus.push_back({gold.text, 0});
    corpus.push_back({augmented, 1});
  }
  return corpus;
}

namespace {

constexpr std::size_t kHashDim = 2048;
// Dense features appended after the hashed n-gram block.
constexpr std::size_t kDenseDim = 2;
constexpr std::size_t kFeatureDim = kHashDim + kDenseDim;

}  // namespace

InformativenessScorer::InformativenessScorer()
    : weights_(kFeatureDim, 0.0) {}

std::vector<std::pair<std::size_t, double>> InformativenessScorer::features(
    const std::string& text) const {
  std::vector<std::pair<std::size_t, double>> feats;
  std::istringstream in(lowercase(text));
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);

  std::set<std::size_t> seen;
  auto add_ngram = [&](const std::string& gram) {
    std::size_t idx = fnv1a64(gram) % kHashDim;
    if (seen.insert(idx).second) feats.emplace_back(idx, 1.0);
  };
  for (const auto& w : words) add_ngram(w);
  for (std::size_t i = 0; i + 1 < words.size(); ++i)
    add_ngram(words[i] + " " + words[i + 1]);

  feats.emplace_back(kHashDim, words.size() / 40.0);
  double entity_count = ner_ ? ner_(text).size() : 0.0;
  feats.emplace_back(kHashDim + 1, entity_count / 5.0);
  return feats;
}

double InformativenessScorer::score(const std::string& text) const {
  double z = bias_;
  for (const auto& [idx, value] : features(text)) z += weights_[idx] * value;
  return 1.0 / (1.0 + std::exp(-z));
}

void InformativenessScorer::save(const std::filesystem::path& path) const {
  json j;
  j["feature_spec_version"] = kInformativenessFeatureVersion;
  j["bias"] = bias_;
  j["weights"] = weights_;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scorer: " + path.string());
  out << j.dump();
}

InformativenessScorer InformativenessScorer::load(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scorer: " + path.string());
  json j = json::parse(in);
  if (j.at("feature_spec_version").get<int>() != kInformativenessFeatureVersion)
    throw std::runtime_error("scorer feature spec version mismatch");
  InformativenessScorer scorer;
  scorer.bias_ = j.at("bias").get<double>();
  scorer.weights_ = j.at("weights").get<std::vector<double>>();
  if (scorer.weights_.size() != kFeatureDim)
    throw std::runtime_error("scorer weight dimension mismatch");
  return scorer;
}

InformativenessScorer rf3_train(const std::vector<LabeledText>& corpus,
                                const EntityExtractor& ner, int epochs,
                                double lr) {
  bool has_pos = false, has_neg = false;
  for (const auto& sample : corpus) (sample.label ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    throw std::invalid_argument(
        "informativeness corpus must contain both classes");

  InformativenessScorer scorer;
  scorer.ner_ = ner;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (const auto& sample : corpus) {
      double p = scorer.score(sample.text);
      double err = sample.label - p;
      for (const auto& [idx, value] : scorer.features(sample.text))
        scorer.weights_[idx] += lr * err * value;
      scorer.bias_ += lr * err;
    }
  }
  return scorer;
}

// ---------------------------------------------------------------------------
// Combination

std::string to_string(RewardId id) {
  switch (id) {
    case RewardId::rf1: return "rf1";
    case RewardId::rf2: return "rf2";
    case RewardId::rf3: return "rf3";
    default: return "rf4";
  }
}

RewardId reward_id_from_string(const std::string& s) {
  if (s == "rf1") return RewardId::rf1;
  if (s == "rf2") return RewardId::rf2;
  if (s == "rf3") return RewardId::rf3;
  if (s == "rf4") return RewardId::rf4;
  throw std::invalid_argument("unknown reward id: " + s);
}

double reward_component(const RewardVector& v, RewardId id) {
  switch (id) {
    case RewardId::rf1: return v.rf1_coverage;
    case RewardId::rf2: return v.rf2_entity;
    case RewardId::rf3: return v.rf3_informativeness;
    default: return v.rf4_length;
  }
}

double combine_rewards(const RewardVector& components,
                       const std::vector<RewardId>& active) {
  if (active.empty())
    throw std::invalid_argument("combine_rewards with empty active set");
  double sum = 0.0;
  for (RewardId id : active) sum += reward_component(components, id);
  return 0.25 * components.rouge + 0.75 * sum / active.size();
}

}  // namespace facet
