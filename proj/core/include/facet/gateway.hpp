#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "facet/types.hpp"

namespace facet {

enum class TemplateId {
  summarize_user,
  detect_community,
  gen_gold_focus,
  make_informative,
};

std::string to_string(TemplateId id);

struct PromptRequest {
  TemplateId template_id = TemplateId::summarize_user;
  std::string rendered_text;
  std::string model_hint = "default";
  int max_tokens = 256;
  double temperature = 0.0;
};

struct BackendResponse {
  std::string text;
  bool cached = false;
  std::uint64_t latency_ms = 0;
};

class CacheMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Text-in/text-out completion backend. Implementations must tolerate
// concurrent in-flight requests.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse complete_once(const PromptRequest& req) = 0;
};

// Deterministic rule-table backend for tests and fixture pipelines.
// First rule whose `contains` substring occurs in the prompt wins; an
// optional handler takes precedence over the rule table.
class ScriptedMockBackend : public Backend {
 public:
  struct Rule {
    std::string contains;
    std::string response;
  };

  explicit ScriptedMockBackend(std::string default_response = "")
      : default_response_(std::move(default_response)) {}

  void add_rule(std::string contains, std::string response);
  void set_handler(std::function<std::optional<std::string>(const PromptRequest&)> h);
  static ScriptedMockBackend from_rules_file(const std::filesystem::path& path);

  BackendResponse complete_once(const PromptRequest& req) override;

 private:
  std::vector<Rule> rules_;
  std::function<std::optional<std::string>(const PromptRequest&)> handler_;
  std::string default_response_;
};

// Append-only JSONL cache keyed by (template_id, rendered_text, model_hint,
// temperature). Without an inner backend it runs in strict replay mode and a
// cache miss is an error.
class ReplayCacheBackend : public Backend {
 public:
  ReplayCacheBackend(std::filesystem::path cache_file,
                     std::shared_ptr<Backend> inner = nullptr);

  BackendResponse complete_once(const PromptRequest& req) override;

  static std::string cache_key(const PromptRequest& req);
  bool strict() const { return inner_ == nullptr; }

 private:
  std::filesystem::path cache_file_;
  std::shared_ptr<Backend> inner_;
  std::map<std::string, std::string> entries_;
  std::mutex mu_;
};

// Plain HTTP chat-completion backend. Auth token is read from the named
// environment variable at request time.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string base_url, std::string model,
              std::string token_env_var = "FACET_API_TOKEN");

  BackendResponse complete_once(const PromptRequest& req) override;

 private:
  std::string base_url_;
  std::string model_;
  std::string token_env_var_;
};

// Retries transient backend failures with exponential backoff.
BackendResponse complete(const PromptRequest& req, Backend& backend,
                         int max_attempts = 3, int base_backoff_ms = 100);

// Prompt templates with {name} placeholders. Built-in defaults can be
// overridden by <template_name>.txt files in a directory.
class TemplateStore {
 public:
  TemplateStore();

  const std::string& get(const std::string& name) const;
  void set(const std::string& name, std::string text);
  void load_overrides(const std::filesystem::path& dir);

  static std::string render(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

 private:
  std::map<std::string, std::string> templates_;
};

// Number of tweets embedded in a Twitter summarization prompt.
inline constexpr int kTweetSampleSize = 10;
inline constexpr char kCommunitySeparator[] = ";;;;;";

PromptRequest render_summarize_prompt(const UserRecord& user,
                                      const TemplateStore& templates,
                                      std::uint64_t seed = 0);

// Users appear as positional aliases user_1..user_6 bound to
// sample.presentation_order; summaries must follow the same order. With
// focus.source == none the prompt is the with-focus prompt minus the focus
// line.
PromptRequest render_detection_prompt(const SampleSextet& sample,
                                      const std::vector<std::string>& summaries,
                                      const FocusArea& focus,
                                      const TemplateStore& templates);

// Never throws. Aliases user_k map to ordered_ids[k-1]; literal ids are also
// recognized. Ids on both sides of the separator go to the community side.
CommunityPrediction parse_community_response(
    const std::string& raw, const std::vector<std::string>& ordered_ids);

// Strips sentences that reference user ordering from generated focus areas.
struct OrderingFilter {
  std::vector<std::string> banned_phrases = {
      "first three users", "first 3 users", "last three users",
      "last 3 users",      "user order",    "order of the users",
      "ordering"};
  struct Result {
    std::string text;
    bool flagged = false;
  };
  Result apply(const std::string& text) const;
};

// Summaries must be ordered gold_c1 first then gold_c2, each sorted by id.
FocusArea generate_gold_focus_area(const SampleSextet& sample,
                                   const std::vector<std::string>& summaries,
                                   Backend& backend,
                                   const TemplateStore& templates,
                                   const OrderingFilter& filter = {},
                                   int max_attempts = 3,
                                   int base_backoff_ms = 100);

PromptRequest render_informative_prompt(const FocusArea& focus,
                                        const TemplateStore& templates);

}  // namespace facet
