#include "facet/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "facet/dataset.hpp"

namespace facet {

using nlohmann::json;

namespace {

template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = 0; i + 1 < items.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (items.size() - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace

FixtureDataset make_fixture_dataset(int n, std::uint64_t seed) {
  FixtureDataset fixture;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < n; ++i) {
    std::string ea = "topic_" + std::to_string(i) + "_alpha";
    std::string eb = "topic_" + std::to_string(i) + "_beta";
    fixture.entities.push_back(ea);
    fixture.entities.push_back(eb);

    SampleSextet sample;
    sample.sample_id = "fixture-" + std::to_string(i);
    sample.topic_entities = {ea, eb};
    for (int side = 0; side < 2; ++side) {
      const std::string& entity = side == 0 ? ea : eb;
      for (int k = 0; k < 3; ++k) {
        UserRecord user;
        user.user_id = "fx" + std::to_string(i) + (side == 0 ? "a" : "b") +
                       std::to_string(k);
        user.platform = Platform::reddit;
        user.raw_texts = {"I care deeply about " + entity + " policy",
                          "More thoughts on " + entity + " today"};
        (side == 0 ? sample.gold_c1 : sample.gold_c2).insert(user.user_id);
        sample.users.push_back(std::move(user));
      }
    }
    for (const auto& u : sample.users)
      sample.presentation_order.push_back(u.user_id);
    seeded_shuffle(sample.presentation_order, rng);
    sample.split = i % 5 == 4 ? Split::test : (i % 5 == 3 ? Split::val : Split::train);
    validate(sample);
    fixture.samples.push_back(std::move(sample));
  }
  return fixture;
}

namespace {

std::vector<std::string> lines_with_prefix(const std::string& text,
                                           const std::string& prefix) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) out.push_back(line.substr(prefix.size()));
  return out;
}

// The six "user_k: summary" lines of a rendered prompt, in order.
std::vector<std::string> user_summary_lines(const std::string& prompt) {
  std::vector<std::string> out;
  for (int k = 1; k <= 6; ++k) {
    std::string prefix = "user_" + std::to_string(k) + ": ";
    auto lines = lines_with_prefix(prompt, prefix);
    out.push_back(lines.empty() ? "" : lines.front());
  }
  return out;
}

std::string alias_list(const std::vector<int>& users) {
  std::string out;
  for (std::size_t i = 0; i < users.size(); ++i)
    out += (i ? ", " : "") + ("user_" + std::to_string(users[i]));
  return out;
}

}  // namespace

std::shared_ptr<ScriptedMockBackend> make_fixture_backend(
    std::vector<std::string> entities) {
  auto backend = std::make_shared<ScriptedMockBackend>();
  backend->set_handler([entities = std::move(entities)](
                           const PromptRequest& req) -> std::optional<std::string> {
    const std::string& prompt = req.rendered_text;
    switch (req.template_id) {
      case TemplateId::summarize_user: {
        auto comments = lines_with_prefix(prompt, "Reddit comment: ");
        std::string joined;
        for (std::size_t i = 0; i < comments.size(); ++i)
          joined += (i ? "; " : "") + comments[i];
        return "The user mentions " + joined + ".";
      }
      case TemplateId::detect_community: {
        auto summaries = user_summary_lines(prompt);
        // Focus region sits between the question and the output instructions.
        std::string focus;
        auto q = prompt.find("same community?");
        auto l = prompt.find("\nList the members");
        if (q != std::string::npos && l != std::string::npos)
          focus = prompt.substr(q, l - q);

        std::vector<std::string> focus_entities;
        for (const auto& entity : entities)
          if (focus.find(entity) != std::string::npos)
            focus_entities.push_back(entity);

        if (focus_entities.empty())
          return std::string(";;;;; user_1, user_2, user_3, user_4, user_5, user_6");

        std::vector<int> members, rest;
        for (int k = 0; k < 6; ++k)
          (summaries[k].find(focus_entities.front()) != std::string::npos
               ? members
               : rest)
              .push_back(k + 1);
        if (members.empty() || members.size() == 6)
          return std::string(";;;;; user_1, user_2, user_3, user_4, user_5, user_6");

        if (focus_entities.size() == 1 && members.size() >= 2 && !rest.empty()) {
          // Single focus entity: good but imperfect community.
          std::swap(members.back(), rest.front());
          std::sort(members.begin(), members.end());
          std::sort(rest.begin(), rest.end());
        }
        return alias_list(members) + " ;;;;; " + alias_list(rest);
      }
      case TemplateId::gen_gold_focus: {
        auto summaries = user_summary_lines(prompt);
        for (const auto& entity : entities) {
          int hits = 0;
          for (int k = 0; k < 3; ++k)
            if (summaries[k].find(entity) != std::string::npos) ++hits;
          if (hits == 3) return "Focus on " + entity + ".";
        }
        return std::string("Focus on the discussion.");
      }
      case TemplateId::make_informative: {
        auto start = prompt.find("\n\n");
        auto end = prompt.rfind("\n\n");
        std::string focus = start != std::string::npos && end > start + 2
                                ? prompt.substr(start + 2, end - start - 2)
                                : "";
        return focus +
               " The communities disagree over specific legislation, named "
               "advocates, and the detailed policy debates around it.";
      }
    }
    return std::nullopt;
  });
  return backend;
}

// ---------------------------------------------------------------------------
// FixtureWorld

FixtureWorld::FixtureWorld(int n, std::uint64_t seed)
    : fixture_(make_fixture_dataset(n, seed)),
      backend_(make_fixture_backend(fixture_.entities)),
      extractor_(dictionary_extractor(fixture_.entities)) {
  for (const auto& sample : fixture_.samples)
    by_input_[policy_input(sample)] = &sample;
}

std::vector<const SampleSextet*> FixtureWorld::split(Split s) const {
  std::vector<const SampleSextet*> out;
  for (const auto& sample : fixture_.samples)
    if (sample.split == s) out.push_back(&sample);
  return out;
}

std::vector<std::string> FixtureWorld::summaries(
    const SampleSextet& sample, const std::vector<std::string>& order) const {
  std::map<std::string, const UserRecord*> by_id;
  for (const auto& u : sample.users) by_id[u.user_id] = &u;
  std::vector<std::string> out;
  for (const auto& id : order) {
    auto cached = summary_cache_.find(id);
    if (cached != summary_cache_.end()) {
      out.push_back(cached->second);
      continue;
    }
    PromptRequest req = render_summarize_prompt(*by_id.at(id), templates_);
    std::string summary = complete(req, *backend_).text;
    summary_cache_[id] = summary;
    out.push_back(summary);
  }
  return out;
}

std::string FixtureWorld::policy_input(const SampleSextet& sample) const {
  auto sums = summaries(sample, sample.presentation_order);
  std::string out;
  for (const auto& s : sums) out += s + "\n";
  return out;
}

const SampleSextet& FixtureWorld::sample_for_input(const std::string& input) const {
  auto it = by_input_.find(input);
  if (it == by_input_.end())
    throw std::invalid_argument("unknown policy input");
  return *it->second;
}

std::vector<std::string> FixtureWorld::focus_candidates(
    const SampleSextet& sample) const {
  auto entities = std::vector<std::string>(sample.topic_entities.begin(),
                                           sample.topic_entities.end());
  return {"", "Focus on the discussion.", "Focus on " + entities[0] + ".",
          "Focus on " + entities[0] + " and " + entities[1] + "."};
}

FocusArea FixtureWorld::gold_focus(const SampleSextet& sample) const {
  std::vector<std::string> order(sample.gold_c1.begin(), sample.gold_c1.end());
  order.insert(order.end(), sample.gold_c2.begin(), sample.gold_c2.end());
  return generate_gold_focus_area(sample, summaries(sample, order), *backend_,
                                  templates_);
}

CommunityPrediction FixtureWorld::detect(const SampleSextet& sample,
                                         const FocusArea& focus) const {
  auto sums = summaries(sample, sample.presentation_order);
  PromptRequest req = render_detection_prompt(sample, sums, focus, templates_);
  BackendResponse resp = complete(req, *backend_);
  return parse_community_response(resp.text, sample.presentation_order);
}

RewardVector FixtureWorld::reward(const SampleSextet& sample,
                                  const std::string& focus_text,
                                  const InformativenessScorer* scorer) const {
  FocusArea focus{focus_text, focus_text.empty() ? FocusSource::none
                                                 : FocusSource::rl_model};
  CommunityPrediction pred = detect(sample, focus);

  std::vector<std::string> c1_sums, c2_sums;
  for (const auto& id : sample.gold_c1)
    c1_sums.push_back(summaries(sample, {id}).front());
  for (const auto& id : sample.gold_c2)
    c2_sums.push_back(summaries(sample, {id}).front());
  DiscriminativeEntitySet des =
      discriminative_entities(c1_sums, c2_sums, extractor_);

  RewardVector rv;
  rv.rf1_coverage = rf1(pred, sample.gold_c1, sample.gold_c2);
  rv.rf2_entity = rf2(focus, des);
  rv.rf3_informativeness = scorer ? scorer->score(focus) : 0.0;
  rv.rf4_length = rf4(focus);
  rv.rouge = rouge_reward(focus, gold_focus(sample));
  return rv;
}

double FixtureWorld::dataset_coverage_with_focus(
    const std::vector<const SampleSextet*>& samples,
    const std::function<FocusArea(const SampleSextet&)>& provider) const {
  std::vector<double> per_sample;
  for (const SampleSextet* sample : samples) {
    CommunityPrediction pred = detect(*sample, provider(*sample));
    per_sample.push_back(
        coverage(pred, sample->gold_c1, sample->gold_c2).coverage);
  }
  return dataset_coverage(per_sample);
}

std::vector<SlPair> FixtureWorld::sl_pairs(
    const std::vector<const SampleSextet*>& samples) const {
  std::vector<SlPair> pairs;
  for (const SampleSextet* sample : samples)
    pairs.push_back({policy_input(*sample), gold_focus(*sample).text});
  return pairs;
}

RlTask FixtureWorld::rl_task(const std::vector<const SampleSextet*>& train,
                             const std::vector<const SampleSextet*>& val,
                             const InformativenessScorer* scorer) const {
  RlTask task;
  for (const SampleSextet* s : train) task.train_inputs.push_back(policy_input(*s));
  for (const SampleSextet* s : val) task.val_inputs.push_back(policy_input(*s));
  task.reward = [this, scorer](const std::string& input,
                               const std::string& output) {
    return reward(sample_for_input(input), output, scorer);
  };
  return task;
}

// ---------------------------------------------------------------------------
// Evaluation and manifests

EvalResult evaluate_dataset(
    const std::vector<SampleSextet>& samples, Backend& backend,
    const TemplateStore& templates,
    const std::function<FocusArea(const SampleSextet&)>& focus_provider) {
  std::ostringstream csv;
  csv << "sample_id,matched_gold,correct,incorrect,missing,coverage\n";
  std::vector<double> per_sample;
  for (const auto& sample : samples) {
    std::map<std::string, const UserRecord*> by_id;
    for (const auto& u : sample.users) by_id[u.user_id] = &u;
    std::vector<std::string> sums;
    for (const auto& id : sample.presentation_order) {
      const UserRecord* user = by_id.at(id);
      if (user->summary) {
        sums.push_back(*user->summary);
      } else {
        PromptRequest req = render_summarize_prompt(*user, templates);
        sums.push_back(complete(req, backend).text);
      }
    }
    PromptRequest req =
        render_detection_prompt(sample, sums, focus_provider(sample), templates);
    BackendResponse resp = complete(req, backend);
    CommunityPrediction pred =
        parse_community_response(resp.text, sample.presentation_order);
    CoverageBreakdown b = coverage(pred, sample.gold_c1, sample.gold_c2);
    per_sample.push_back(b.coverage);
    csv << sample.sample_id << ","
        << (b.matched_gold == GoldSide::c1 ? "c1" : "c2") << "," << b.correct
        << "," << b.incorrect << "," << b.missing << "," << std::setprecision(6)
        << b.coverage << "\n";
  }
  EvalResult result;
  result.csv = csv.str();
  result.dataset_cov = dataset_coverage(per_sample);
  json aggregate;
  aggregate["dataset_coverage"] = result.dataset_cov;
  aggregate["num_samples"] = samples.size();
  result.aggregate_json = aggregate.dump(2) + "\n";
  return result;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::string& config_hash, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& outputs) {
  json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  json digests = json::object();
  for (const auto& path : outputs) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    std::ostringstream hex;
    hex << std::hex << fnv1a64(buf.str());
    digests[path.filename().string()] = hex.str();
  }
  j["outputs"] = digests;
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

void run_fixture_pipeline(const std::filesystem::path& out_dir, int n,
                          std::uint64_t seed) {
  std::filesystem::create_directories(out_dir);
  FixtureWorld world(n, seed);

  serialize_dataset(world.samples(), out_dir / "dataset.jsonl");

  std::ofstream summaries(out_dir / "summaries.jsonl");
  for (const auto& sample : world.samples()) {
    auto sums = world.summaries(sample, sample.presentation_order);
    for (std::size_t i = 0; i < sums.size(); ++i) {
      json j;
      j["user_id"] = sample.presentation_order[i];
      j["summary"] = sums[i];
      summaries << j.dump() << "\n";
    }
  }
  summaries.close();

  EvalResult eval = evaluate_dataset(
      world.samples(), world.backend(), world.templates(),
      [](const SampleSextet&) { return FocusArea::absent(); });
  std::ofstream(out_dir / "eval.csv") << eval.csv;
  std::ofstream(out_dir / "eval.json") << eval.aggregate_json;

  write_manifest(out_dir, "fixture", seed,
                 {out_dir / "dataset.jsonl", out_dir / "summaries.jsonl",
                  out_dir / "eval.csv", out_dir / "eval.json"});
}

}  // namespace facet
