// facet: community detection with trained focus-area prompts.
//
// Subcommands cover the full pipeline: dataset construction, user
// summarization, gold focus-area generation, supervised and RL training of
// the focus-area generator, evaluation, reward ablations, and the downstream
// graph purity analysis.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "facet/config.hpp"
#include "facet/dataset.hpp"
#include "facet/gateway.hpp"
#include "facet/graph.hpp"
#include "facet/ingest.hpp"
#include "facet/metrics.hpp"
#include "facet/pipeline.hpp"
#include "facet/policy.hpp"
#include "facet/rewards.hpp"
#include "facet/trainer.hpp"
#include "facet/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string backend_kind;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Run config file (INI)");
  cmd->add_option("--backend", opts.backend_kind,
                  "Backend: scripted-mock|replay|http");
  cmd->add_option("--seed", opts.seed, "Seed override")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

facet::RunConfig resolve_config(const CommonOpts& opts) {
  facet::RunConfig cfg;
  if (!opts.config_path.empty()) cfg = facet::RunConfig::load(opts.config_path);
  if (!opts.backend_kind.empty()) cfg.backend_kind = opts.backend_kind;
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    cfg.train.rl.seed = opts.seed;
  }
  cfg.validate_paths();
  return cfg;
}

std::shared_ptr<facet::Backend> make_backend(const facet::RunConfig& cfg) {
  if (cfg.backend_kind == "scripted-mock") {
    if (cfg.rules_path.empty())
      throw facet::ValidationError(
          "config field paths.rules: required for the scripted-mock backend");
    return std::make_shared<facet::ScriptedMockBackend>(
        facet::ScriptedMockBackend::from_rules_file(cfg.rules_path));
  }
  if (cfg.backend_kind == "replay") {
    if (cfg.cache_path.empty())
      throw facet::ValidationError(
          "config field paths.cache: required for the replay backend");
    std::shared_ptr<facet::Backend> inner;
    if (!cfg.http_url.empty())
      inner = std::make_shared<facet::HttpBackend>(cfg.http_url, cfg.http_model,
                                                   cfg.token_env);
    return std::make_shared<facet::ReplayCacheBackend>(cfg.cache_path, inner);
  }
  if (cfg.backend_kind == "http") {
    if (cfg.http_url.empty())
      throw facet::ValidationError("config field backend.url: required for http");
    return std::make_shared<facet::HttpBackend>(cfg.http_url, cfg.http_model,
                                                cfg.token_env);
  }
  throw facet::ValidationError("config field backend.kind: unknown backend '" +
                               cfg.backend_kind + "'");
}

facet::TemplateStore make_templates(const facet::RunConfig& cfg) {
  facet::TemplateStore templates;
  if (!cfg.templates_dir.empty()) templates.load_overrides(cfg.templates_dir);
  return templates;
}

facet::EntityExtractor load_extractor(const std::string& entities_file) {
  std::vector<std::string> entities;
  if (!entities_file.empty()) {
    std::ifstream in(entities_file);
    if (!in)
      throw facet::ValidationError("cannot open entities file: " + entities_file);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) entities.push_back(line);
  }
  return facet::dictionary_extractor(entities);
}

std::vector<std::string> summaries_in_order(
    const facet::SampleSextet& sample, const std::vector<std::string>& order) {
  std::map<std::string, const facet::UserRecord*> by_id;
  for (const auto& u : sample.users) by_id[u.user_id] = &u;
  std::vector<std::string> out;
  for (const auto& id : order) {
    const auto* user = by_id.at(id);
    if (!user->summary)
      throw facet::ValidationError("sample " + sample.sample_id + ": user " +
                                   id + " has no summary; run summarize first");
    out.push_back(*user->summary);
  }
  return out;
}

std::string policy_input_text(const facet::SampleSextet& sample) {
  std::string out;
  for (const auto& s : summaries_in_order(sample, sample.presentation_order))
    out += s + "\n";
  return out;
}

// Shared reward plumbing for train-rl and ablate.
facet::RlTask make_rl_task(const std::vector<facet::SampleSextet>& samples,
                           facet::Backend& backend,
                           const facet::TemplateStore& templates,
                           const facet::EntityExtractor& extractor,
                           const facet::InformativenessScorer* scorer) {
  std::map<std::string, const facet::SampleSextet*> by_input;
  facet::RlTask task;
  for (const auto& sample : samples) {
    std::string input = policy_input_text(sample);
    by_input[input] = &sample;
    (sample.split == facet::Split::val ? task.val_inputs : task.train_inputs)
        .push_back(input);
  }
  task.reward = [&backend, &templates, extractor, scorer,
                 by_input = std::move(by_input)](const std::string& input,
                                                 const std::string& output) {
    const facet::SampleSextet& sample = *by_input.at(input);
    facet::FocusArea focus{output, output.empty()
                                       ? facet::FocusSource::none
                                       : facet::FocusSource::rl_model};
    auto sums = summaries_in_order(sample, sample.presentation_order);
    auto req = facet::render_detection_prompt(sample, sums, focus, templates);
    auto resp = facet::complete(req, backend);
    auto pred =
        facet::parse_community_response(resp.text, sample.presentation_order);

    std::vector<std::string> c1_sums, c2_sums;
    for (const auto& id : sample.gold_c1)
      c1_sums.push_back(summaries_in_order(sample, {id}).front());
    for (const auto& id : sample.gold_c2)
      c2_sums.push_back(summaries_in_order(sample, {id}).front());
    auto des = facet::discriminative_entities(c1_sums, c2_sums, extractor);

    facet::RewardVector rv;
    rv.rf1_coverage = facet::rf1(pred, sample.gold_c1, sample.gold_c2);
    rv.rf2_entity = facet::rf2(focus, des);
    rv.rf3_informativeness = scorer ? scorer->score(focus) : 0.0;
    rv.rf4_length = facet::rf4(focus);
    if (sample.gold_focus_area)
      rv.rouge = facet::rouge_reward(
          focus, {*sample.gold_focus_area, facet::FocusSource::gold_llm});
    return rv;
  };
  return task;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facet: LLM community detection with trained focus areas"};
  app.require_subcommand(1);

  // ---- build-dataset
  auto* build = app.add_subcommand("build-dataset", "Construct a sextet dataset");
  CommonOpts build_opts;
  add_common(build, build_opts);
  std::string platform = "reddit", dump, subreddits, entities_file, out_path;
  int window_days = facet::kDefaultWindowDays;
  int fixture_n = 20;
  build->add_option("--platform", platform, "reddit|twibot|fixture");
  build->add_option("--dump", dump, "Input dump file");
  build->add_option("--subreddits", subreddits, "Two subreddits, comma separated");
  build->add_option("--window-days", window_days, "Pairing window in days");
  build->add_option("--entities-file", entities_file,
                    "Entity dictionary for the NER extractor");
  build->add_option("--n", fixture_n, "Fixture sample count");
  build->add_option("--out", out_path, "Output dataset JSONL")->required();

  // ---- summarize
  auto* summarize = app.add_subcommand("summarize", "Generate user summaries");
  CommonOpts sum_opts;
  add_common(summarize, sum_opts);
  std::string sum_dataset;
  summarize->add_option("--dataset", sum_dataset, "Dataset JSONL")->required();

  // ---- gen-gold-focus
  auto* gold = app.add_subcommand("gen-gold-focus",
                                  "Generate gold focus areas for train/val");
  CommonOpts gold_opts;
  add_common(gold, gold_opts);
  std::string gold_dataset;
  gold->add_option("--dataset", gold_dataset, "Dataset JSONL")->required();

  // ---- train-sl
  auto* sl = app.add_subcommand("train-sl", "Supervised focus-area training");
  CommonOpts sl_opts;
  add_common(sl, sl_opts);
  std::string sl_dataset, sl_out;
  sl->add_option("--dataset", sl_dataset, "Dataset JSONL")->required();
  sl->add_option("--out", sl_out, "Output policy artifact")->required();

  // ---- train-rl / ablate
  auto* rl = app.add_subcommand("train-rl", "Curriculum RL fine-tuning");
  auto* ablate = app.add_subcommand("ablate", "Single-reward training run");
  CommonOpts rl_opts, ablate_opts;
  std::string rl_dataset, rl_policy, rl_out, rl_entities, rl_scorer, ablate_reward;
  for (auto* cmd : {rl, ablate}) {
    add_common(cmd, cmd == rl ? rl_opts : ablate_opts);
    cmd->add_option("--dataset", rl_dataset, "Dataset JSONL")->required();
    cmd->add_option("--policy", rl_policy, "Initial policy artifact")->required();
    cmd->add_option("--out", rl_out, "Output policy artifact")->required();
    cmd->add_option("--entities-file", rl_entities, "Entity dictionary");
    cmd->add_option("--scorer", rl_scorer, "Informativeness scorer artifact");
  }
  ablate->add_option("--reward", ablate_reward, "Reward to train alone")
      ->required();

  // ---- eval
  auto* eval = app.add_subcommand("eval", "Coverage evaluation");
  CommonOpts eval_opts;
  add_common(eval, eval_opts);
  std::string eval_dataset, eval_focus = "none", eval_policy, eval_outdir = ".";
  eval->add_option("--dataset", eval_dataset, "Dataset JSONL")->required();
  eval->add_option("--focus", eval_focus, "none|gold|policy");
  eval->add_option("--policy", eval_policy, "Policy artifact for --focus policy");
  eval->add_option("--out-dir", eval_outdir, "Output directory");

  // ---- inject-communities
  auto* inject = app.add_subcommand("inject-communities",
                                    "Add community cliques to a graph");
  CommonOpts inject_opts;
  add_common(inject, inject_opts);
  std::string inj_nodes, inj_edges, inj_communities, inj_out;
  inject->add_option("--nodes", inj_nodes, "Node CSV")->required();
  inject->add_option("--edges", inj_edges, "Edge CSV")->required();
  inject->add_option("--communities", inj_communities,
                     "JSON list of user-id lists")->required();
  inject->add_option("--out", inj_out, "Output edge CSV")->required();

  // ---- purity
  auto* purity = app.add_subcommand("purity", "Cluster purity of user embeddings");
  CommonOpts purity_opts;
  add_common(purity, purity_opts);
  std::string pur_nodes, pur_edges, pur_embeddings;
  int pur_k = 17;
  purity->add_option("--nodes", pur_nodes, "Node CSV")->required();
  purity->add_option("--edges", pur_edges, "Edge CSV")->required();
  purity->add_option("--embeddings", pur_embeddings,
                     "Embedding CSV (default: smoothed features)");
  purity->add_option("--k", pur_k, "Number of clusters");

  // ---- export-annotation-csv
  auto* annot = app.add_subcommand("export-annotation-csv",
                                   "Export (model, gold) focus-area pairs");
  CommonOpts annot_opts;
  add_common(annot, annot_opts);
  std::string annot_dataset, annot_policy, annot_out;
  annot->add_option("--dataset", annot_dataset, "Dataset JSONL")->required();
  annot->add_option("--policy", annot_policy, "Policy artifact")->required();
  annot->add_option("--out", annot_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build->parsed()) {
      auto cfg = resolve_config(build_opts);
      std::vector<facet::SampleSextet> samples;
      if (platform == "fixture") {
        samples = facet::make_fixture_dataset(fixture_n, cfg.seed).samples;
      } else if (platform == "reddit") {
        if (dump.empty() || subreddits.empty())
          throw facet::ValidationError("--dump and --subreddits are required");
        auto comma = subreddits.find(',');
        if (comma == std::string::npos)
          throw facet::ValidationError(
              "--subreddits must name two subreddits, comma separated");
        std::string sub_a = subreddits.substr(0, comma);
        std::string sub_b = subreddits.substr(comma + 1);
        auto posts = facet::load_reddit_dump(dump);
        std::vector<facet::RedditPost> a, b;
        for (auto& post : posts) {
          if (post.subreddit == sub_a) a.push_back(std::move(post));
          else if (post.subreddit == sub_b) b.push_back(std::move(post));
        }
        facet::SextetBuildOptions options;
        options.seed = cfg.seed;
        options.salt = cfg.salt;
        samples = facet::build_reddit_dataset(a, b, load_extractor(entities_file),
                                              window_days, options);
      } else if (platform == "twibot") {
        if (dump.empty())
          throw facet::ValidationError("--dump is required for twibot");
        facet::SextetBuildOptions options;
        options.seed = cfg.seed;
        options.salt = cfg.salt;
        samples = facet::build_twibot_sextets(facet::load_twibot_dump(dump),
                                              options);
      } else {
        throw facet::ValidationError("unknown --platform: " + platform);
      }
      facet::serialize_dataset(samples, out_path);
      facet::write_manifest(fs::path(out_path).parent_path(), cfg.hash(),
                            cfg.seed, {out_path});
      std::cout << "wrote " << samples.size() << " samples to " << out_path
                << "\n";
    } else if (summarize->parsed()) {
      auto cfg = resolve_config(sum_opts);
      auto backend = make_backend(cfg);
      auto templates = make_templates(cfg);
      auto samples = facet::deserialize_dataset(sum_dataset);
      for (auto& sample : samples)
        for (auto& user : sample.users) {
          if (user.summary) continue;
          auto req = facet::render_summarize_prompt(user, templates, cfg.seed);
          user.summary = facet::complete(req, *backend).text;
        }
      facet::serialize_dataset(samples, sum_dataset);
      facet::write_manifest(fs::path(sum_dataset).parent_path(), cfg.hash(),
                            cfg.seed, {sum_dataset});
      std::cout << "summarized " << samples.size() << " samples\n";
    } else if (gold->parsed()) {
      auto cfg = resolve_config(gold_opts);
      auto backend = make_backend(cfg);
      auto templates = make_templates(cfg);
      auto samples = facet::deserialize_dataset(gold_dataset);
      int generated = 0;
      for (auto& sample : samples) {
        if (sample.split == facet::Split::test || sample.gold_focus_area)
          continue;
        std::vector<std::string> order(sample.gold_c1.begin(),
                                       sample.gold_c1.end());
        order.insert(order.end(), sample.gold_c2.begin(), sample.gold_c2.end());
        auto focus = facet::generate_gold_focus_area(
            sample, summaries_in_order(sample, order), *backend, templates);
        sample.gold_focus_area = focus.text;
        ++generated;
      }
      facet::serialize_dataset(samples, gold_dataset);
      facet::write_manifest(fs::path(gold_dataset).parent_path(), cfg.hash(),
                            cfg.seed, {gold_dataset});
      std::cout << "generated " << generated << " gold focus areas\n";
    } else if (sl->parsed()) {
      auto cfg = resolve_config(sl_opts);
      auto samples = facet::deserialize_dataset(sl_dataset);
      std::vector<facet::SlPair> train, val;
      for (const auto& sample : samples) {
        facet::SlPair pair{policy_input_text(sample), sample.gold_focus_area};
        if (sample.split == facet::Split::train) train.push_back(std::move(pair));
        else if (sample.split == facet::Split::val) val.push_back(std::move(pair));
      }
      // Every gold focus area is a candidate for every input, so the loss
      // starts from a nondegenerate distribution.
      std::set<std::string> target_set;
      for (const auto& pair : train)
        if (pair.target) target_set.insert(*pair.target);
      facet::CandidatePolicy policy(
          std::vector<std::string>(target_set.begin(), target_set.end()));
      auto result = facet::train_supervised(policy, train, cfg.train.sl, val);
      std::ofstream(sl_out) << policy.snapshot();
      facet::write_manifest(fs::path(sl_out).parent_path(), cfg.hash(), cfg.seed,
                            {sl_out});
      std::cout << "train NLL " << result.initial_nll << " -> "
                << result.final_nll << " (" << result.skipped << " skipped)\n";
    } else if (rl->parsed() || ablate->parsed()) {
      auto cfg = resolve_config(rl->parsed() ? rl_opts : ablate_opts);
      auto backend = make_backend(cfg);
      auto templates = make_templates(cfg);
      auto samples = facet::deserialize_dataset(rl_dataset);
      auto extractor = load_extractor(rl_entities);

      std::optional<facet::InformativenessScorer> scorer;
      if (!rl_scorer.empty())
        scorer = facet::InformativenessScorer::load(rl_scorer);

      facet::CandidatePolicy policy;
      {
        std::ifstream in(rl_policy);
        if (!in)
          throw facet::ValidationError("cannot open policy: " + rl_policy);
        std::stringstream buf;
        buf << in.rdbuf();
        policy.restore(buf.str());
      }

      auto task = make_rl_task(samples, *backend, templates, extractor,
                               scorer ? &*scorer : nullptr);
      facet::CurriculumState curriculum;
      facet::TrainConfig train_cfg = cfg.train;
      if (ablate->parsed()) {
        curriculum.active_rewards = {
            facet::reward_id_from_string(ablate_reward)};
        train_cfg.patience = std::numeric_limits<int>::max();
      }
      fs::path checkpoints = cfg.checkpoints_dir;
      auto result = facet::train_rl(policy, task, curriculum, train_cfg,
                                    checkpoints.empty() ? nullptr : &checkpoints);
      std::ofstream(rl_out) << policy.snapshot();
      facet::write_manifest(fs::path(rl_out).parent_path(), cfg.hash(), cfg.seed,
                            {rl_out});
      std::cout << "ran " << result.updates_run << " updates, final reward "
                << result.final_train_reward << "\n";
    } else if (eval->parsed()) {
      auto cfg = resolve_config(eval_opts);
      auto backend = make_backend(cfg);
      auto templates = make_templates(cfg);
      auto samples = facet::deserialize_dataset(eval_dataset);

      facet::CandidatePolicy policy;
      if (eval_focus == "policy") {
        std::ifstream in(eval_policy);
        if (!in)
          throw facet::ValidationError("--policy required for --focus policy");
        std::stringstream buf;
        buf << in.rdbuf();
        policy.restore(buf.str());
      }
      auto provider = [&](const facet::SampleSextet& sample) -> facet::FocusArea {
        if (eval_focus == "gold" && sample.gold_focus_area)
          return {*sample.gold_focus_area, facet::FocusSource::gold_llm};
        if (eval_focus == "policy") {
          std::string text =
              policy.generate(policy_input_text(sample), facet::DecodeParams{});
          if (!text.empty())
            return {text, facet::FocusSource::rl_model};
        }
        return facet::FocusArea::absent();
      };
      auto result = facet::evaluate_dataset(samples, *backend, templates, provider);
      fs::create_directories(eval_outdir);
      std::ofstream(fs::path(eval_outdir) / "eval.csv") << result.csv;
      std::ofstream(fs::path(eval_outdir) / "eval.json") << result.aggregate_json;
      facet::write_manifest(eval_outdir, cfg.hash(), cfg.seed,
                            {fs::path(eval_outdir) / "eval.csv",
                             fs::path(eval_outdir) / "eval.json"});
      std::cout << "dataset_coverage " << result.dataset_cov << "\n";
    } else if (inject->parsed()) {
      auto cfg = resolve_config(inject_opts);
      auto graph = facet::SocialGraph::load_csv(inj_nodes, inj_edges);
      std::ifstream in(inj_communities);
      if (!in)
        throw facet::ValidationError("cannot open communities file: " +
                                     inj_communities);
      json j = json::parse(in);
      std::vector<std::set<std::string>> communities;
      for (const auto& jc : j)
        communities.emplace_back(jc.begin(), jc.end());
      std::size_t added = facet::inject_community_edges(graph, communities);

      std::ofstream out(inj_out);
      out << "a,b\n";
      for (const auto& id : graph.node_ids(facet::NodeType::user))
        for (const auto& nbr : graph.neighbors(id))
          if (id < nbr) out << id << "," << nbr << "\n";
      for (const auto& id : graph.node_ids(facet::NodeType::source))
        for (const auto& nbr : graph.neighbors(id))
          if (id < nbr) out << id << "," << nbr << "\n";
      for (const auto& id : graph.node_ids(facet::NodeType::article))
        for (const auto& nbr : graph.neighbors(id))
          if (id < nbr) out << id << "," << nbr << "\n";
      out.close();
      facet::write_manifest(fs::path(inj_out).parent_path(), cfg.hash(),
                            cfg.seed, {inj_out});
      std::cout << "added " << added << " edges\n";
    } else if (purity->parsed()) {
      auto cfg = resolve_config(purity_opts);
      auto graph = facet::SocialGraph::load_csv(pur_nodes, pur_edges);
      facet::EmbeddingMap embeddings =
          pur_embeddings.empty() ? facet::smoothed_feature_embeddings(graph)
                                 : facet::load_embeddings_csv(pur_embeddings);
      auto labels = facet::propagate_user_labels(graph);
      double value = facet::cluster_purity(embeddings, labels, pur_k, cfg.seed);
      json j;
      j["purity"] = value;
      j["k"] = pur_k;
      j["labeled_users"] = labels.size();
      std::cout << j.dump(2) << "\n";
    } else if (annot->parsed()) {
      auto cfg = resolve_config(annot_opts);
      auto samples = facet::deserialize_dataset(annot_dataset);
      facet::CandidatePolicy policy;
      {
        std::ifstream in(annot_policy);
        if (!in)
          throw facet::ValidationError("cannot open policy: " + annot_policy);
        std::stringstream buf;
        buf << in.rdbuf();
        policy.restore(buf.str());
      }
      std::ofstream out(annot_out);
      out << "sample_id,model_focus_area,gold_focus_area\n";
      auto escape = [](const std::string& s) {
        std::string quoted = "\"";
        for (char c : s) {
          if (c == '"') quoted += "\"\"";
          else quoted += c;
        }
        return quoted + "\"";
      };
      for (const auto& sample : samples) {
        std::string model =
            policy.generate(policy_input_text(sample), facet::DecodeParams{});
        out << sample.sample_id << "," << escape(model) << ","
            << escape(sample.gold_focus_area.value_or("")) << "\n";
      }
      out.close();
      facet::write_manifest(fs::path(annot_out).parent_path(), cfg.hash(),
                            cfg.seed, {annot_out});
      std::cout << "exported " << samples.size() << " pairs\n";
    }
  } catch (const facet::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
