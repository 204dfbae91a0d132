#include "facet/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "facet/dataset.hpp"

namespace facet {

using nlohmann::json;

std::string to_string(TemplateId id) {
  switch (id) {
    case TemplateId::summarize_user: return "summarize_user";
    case TemplateId::detect_community: return "detect_community";
    case TemplateId::gen_gold_focus: return "gen_gold_focus";
    default: return "make_informative";
  }
}

// ---------------------------------------------------------------------------
// Backends

void ScriptedMockBackend::add_rule(std::string contains, std::string response) {
  rules_.push_back({std::move(contains), std::move(response)});
}

void ScriptedMockBackend::set_handler(
    std::function<std::optional<std::string>(const PromptRequest&)> h) {
  handler_ = std::move(h);
}

ScriptedMockBackend ScriptedMockBackend::from_rules_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open rules file: " + path.string());
  json j = json::parse(in);
  ScriptedMockBackend backend(j.value("default", ""));
  for (const auto& rule : j.value("rules", json::array()))
    backend.add_rule(rule.at("contains").get<std::string>(),
                     rule.at("response").get<std::string>());
  return backend;
}

BackendResponse ScriptedMockBackend::complete_once(const PromptRequest& req) {
  if (handler_) {
    if (auto out = handler_(req)) return {*out, false, 0};
  }
  for (const auto& rule : rules_)
    if (req.rendered_text.find(rule.contains) != std::string::npos)
      return {rule.response, false, 0};
  return {default_response_, false, 0};
}

std::string ReplayCacheBackend::cache_key(const PromptRequest& req) {
  std::ostringstream material;
  material << to_string(req.template_id) << '\x1f' << req.rendered_text << '\x1f'
           << req.model_hint << '\x1f' << req.temperature;
  std::ostringstream out;
  out << std::hex << fnv1a64(material.str());
  return out.str();
}

ReplayCacheBackend::ReplayCacheBackend(std::filesystem::path cache_file,
                                       std::shared_ptr<Backend> inner)
    : cache_file_(std::move(cache_file)), inner_(std::move(inner)) {
  std::ifstream in(cache_file_);
  std::string line;
  while (in && std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
  }
}

BackendResponse ReplayCacheBackend::complete_once(const PromptRequest& req) {
  const std::string key = cache_key(req);
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return {it->second, true, 0};
  }
  if (!inner_)
    throw CacheMissError("strict replay cache miss for key " + key);

  BackendResponse resp = inner_->complete_once(req);
  std::lock_guard lock(mu_);
  entries_[key] = resp.text;
  json j;
  j["key"] = key;
  j["template_id"] = to_string(req.template_id);
  j["prompt"] = req.rendered_text;
  j["response"] = resp.text;
  j["model"] = req.model_hint;
  j["timestamp"] = static_cast<std::int64_t>(std::time(nullptr));
  std::ofstream out(cache_file_, std::ios::app);
  out << j.dump() << "\n";
  return resp;
}

HttpBackend::HttpBackend(std::string base_url, std::string model,
                         std::string token_env_var)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      token_env_var_(std::move(token_env_var)) {}

BackendResponse HttpBackend::complete_once(const PromptRequest& req) {
  httplib::Client client(base_url_);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv(token_env_var_.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + token);

  json body;
  body["model"] = model_.empty() ? req.model_hint : model_;
  body["messages"] = json::array({{{"role", "user"}, {"content", req.rendered_text}}});
  body["max_tokens"] = req.max_tokens;
  body["temperature"] = req.temperature;

  auto start = std::chrono::steady_clock::now();
  auto result = client.Post("/v1/chat/completions", headers, body.dump(),
                            "application/json");
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  if (!result)
    throw BackendError("http request failed: " + httplib::to_string(result.error()));
  if (result->status != 200)
    throw BackendError("http status " + std::to_string(result->status) + ": " +
                       result->body);
  try {
    json j = json::parse(result->body);
    return {j.at("choices").at(0).at("message").at("content").get<std::string>(),
            false, static_cast<std::uint64_t>(elapsed)};
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") + e.what());
  }
}

BackendResponse complete(const PromptRequest& req, Backend& backend,
                         int max_attempts, int base_backoff_ms) {
  if (req.rendered_text.empty())
    throw std::invalid_argument("empty rendered prompt");
  int backoff = base_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      return backend.complete_once(req);
    } catch (const CacheMissError&) {
      throw;  // retrying cannot fill a strict replay cache
    } catch (const BackendError&) {
      if (attempt >= max_attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
}

// ---------------------------------------------------------------------------
// Templates

namespace {

const char kSummarizeTemplate[] =
    "What is the user discussing across their posts, and what is their "
    "perspective?\n\n{body}\n\nRespond with a summary in the form: \"The user "
    "mentions ...\".";

const char kDetectTemplate[] =
    "Below are summaries of six users, named user_1 through user_6.\n\n"
    "{user_summaries}\n"
    "Which users, if any, are similar to each other and should be in the same "
    "community?{focus_line}\n"
    "List the members of the single most closely-knit community, then the "
    "separator \";;;;;\", then all remaining users. If there is no community, "
    "output the separator first, followed by all users.";

const char kGoldFocusTemplate[] =
    "Below are summaries of six users. The first three users form one "
    "community and the last three form another.\n\n"
    "{user_summaries}\n"
    "What topics should we focus on to determine the first 3 users are in a "
    "community, while the others are not?\n"
    "Respond with one short sentence beginning with \"Focus on\". Respond with "
    "the focus area only. Do not mention the users, their names, their count, "
    "or the order they were given in.";

const char kInformativeTemplate[] =
    "Generate a more informative version of the following focus area, "
    "mentioning specific entities and details rather than general topics.\n\n"
    "{focus}\n\n"
    "Respond with only the rewritten focus area.";

}  // namespace

TemplateStore::TemplateStore() {
  templates_["summarize_user"] = kSummarizeTemplate;
  templates_["detect_community"] = kDetectTemplate;
  templates_["gen_gold_focus"] = kGoldFocusTemplate;
  templates_["make_informative"] = kInformativeTemplate;
}

const std::string& TemplateStore::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end())
    throw std::out_of_range("unknown template: " + name);
  return it->second;
}

void TemplateStore::set(const std::string& name, std::string text) {
  templates_[name] = std::move(text);
}

void TemplateStore::load_overrides(const std::filesystem::path& dir) {
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::stringstream buf;
    buf << in.rdbuf();
    templates_[entry.path().stem().string()] = buf.str();
  }
}

std::string TemplateStore::render(
    const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out = tmpl;
  for (const auto& [name, value] : values) {
    const std::string placeholder = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Render operations

namespace {

// Portable seeded index sampler; std::sample's selection is
// implementation-defined.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(n, k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string join_user_summaries(const std::vector<std::string>& summaries) {
  std::ostringstream out;
  for (std::size_t i = 0; i < summaries.size(); ++i)
    out << "user_" << (i + 1) << ": " << summaries[i] << "\n";
  return out.str();
}

}  // namespace

PromptRequest render_summarize_prompt(const UserRecord& user,
                                      const TemplateStore& templates,
                                      std::uint64_t seed) {
  if (user.raw_texts.empty())
    throw std::invalid_argument("user " + user.user_id + " has no raw texts");

  std::ostringstream body;
  if (user.platform == Platform::reddit) {
    for (const auto& text : user.raw_texts)
      body << "Reddit comment: " << text << "\n";
  } else {
    body << "Profile metadata:\n";
    for (const auto& [key, value] : user.metadata)
      body << "  " << key << ": " << value << "\n";
    auto picked = sample_indices(user.raw_texts.size(), kTweetSampleSize, seed);
    for (std::size_t i : picked) body << "Tweet: " << user.raw_texts[i] << "\n";
  }

  PromptRequest req;
  req.template_id = TemplateId::summarize_user;
  req.rendered_text = TemplateStore::render(templates.get("summarize_user"),
                                            {{"body", body.str()}});
  return req;
}

PromptRequest render_detection_prompt(const SampleSextet& sample,
                                      const std::vector<std::string>& summaries,
                                      const FocusArea& focus,
                                      const TemplateStore& templates) {
  if (summaries.size() != 6)
    throw std::invalid_argument("detection prompt needs exactly 6 summaries, got " +
                                std::to_string(summaries.size()));
  std::string focus_line;
  if (focus.source != FocusSource::none) {
    if (focus.text.empty())
      throw ValidationError("focus area with empty text");
    focus_line = "\n" + focus.text;
  }
  PromptRequest req;
  req.template_id = TemplateId::detect_community;
  req.rendered_text = TemplateStore::render(
      templates.get("detect_community"),
      {{"user_summaries", join_user_summaries(summaries)},
       {"focus_line", focus_line}});
  return req;
}

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

CommunityPrediction parse_community_response(
    const std::string& raw, const std::vector<std::string>& ordered_ids) {
  CommunityPrediction pred;
  pred.raw_response = raw;

  std::map<std::string, std::string> by_lower;
  for (const auto& id : ordered_ids) by_lower[lowercase(id)] = id;

  std::size_t sep = raw.find(kCommunitySeparator);
  std::string before = sep == std::string::npos ? raw : raw.substr(0, sep);
  std::string after =
      sep == std::string::npos ? "" : raw.substr(sep + std::strlen(kCommunitySeparator));
  if (sep == std::string::npos) pred.parse_warning = true;

  static const std::regex token_re("[A-Za-z]+_?[0-9]+");
  static const std::regex alias_re("^user_?([0-9]+)$");
  static const std::regex id_like_re("^u(ser)?_?[0-9]+$");

  auto scan = [&](const std::string& text, std::set<std::string>& out) {
    for (std::sregex_iterator it(text.begin(), text.end(), token_re), end;
         it != end; ++it) {
      std::string token = lowercase(it->str());
      if (auto found = by_lower.find(token); found != by_lower.end()) {
        out.insert(found->second);
        continue;
      }
      std::smatch m;
      if (std::regex_match(token, m, alias_re)) {
        std::size_t k = std::stoul(m[1]);
        if (k >= 1 && k <= ordered_ids.size()) {
          out.insert(ordered_ids[k - 1]);
          continue;
        }
      }
      if (std::regex_match(token, id_like_re)) ++pred.dropped_ids;
    }
  };

  scan(before, pred.community);
  scan(after, pred.remainder);
  // An id claimed on both sides belongs to the community.
  for (const auto& id : pred.community) pred.remainder.erase(id);
  return pred;
}

OrderingFilter::Result OrderingFilter::apply(const std::string& text) const {
  Result result;
  std::string sentence;
  auto flush = [&](bool keep_trailing_space) {
    std::string lower = lowercase(sentence);
    bool banned = std::any_of(banned_phrases.begin(), banned_phrases.end(),
                              [&](const std::string& phrase) {
                                return lower.find(lowercase(phrase)) !=
                                       std::string::npos;
                              });
    if (banned)
      result.flagged = true;
    else
      result.text += sentence;
    (void)keep_trailing_space;
    sentence.clear();
  };
  for (char c : text) {
    sentence += c;
    if (c == '.' || c == '!' || c == '?') flush(true);
  }
  if (!sentence.empty()) flush(false);
  // Trim whitespace left behind by removed sentences.
  auto first = result.text.find_first_not_of(" \t\n");
  auto last = result.text.find_last_not_of(" \t\n");
  result.text = first == std::string::npos
                    ? ""
                    : result.text.substr(first, last - first + 1);
  return result;
}

FocusArea generate_gold_focus_area(const SampleSextet& sample,
                                   const std::vector<std::string>& summaries,
                                   Backend& backend,
                                   const TemplateStore& templates,
                                   const OrderingFilter& filter,
                                   int max_attempts, int base_backoff_ms) {
  if (summaries.size() != 6)
    throw std::invalid_argument("gold focus prompt needs exactly 6 summaries");
  if (sample.gold_c1.size() != 3 || sample.gold_c2.size() != 3)
    throw ValidationError("sample " + sample.sample_id +
                          ": gold communities required for gold focus areas");

  PromptRequest req;
  req.template_id = TemplateId::gen_gold_focus;
  req.rendered_text = TemplateStore::render(
      templates.get("gen_gold_focus"),
      {{"user_summaries", join_user_summaries(summaries)}});
  BackendResponse resp = complete(req, backend, max_attempts, base_backoff_ms);

  auto filtered = filter.apply(resp.text);
  return {filtered.text, FocusSource::gold_llm};
}

PromptRequest render_informative_prompt(const FocusArea& focus,
                                        const TemplateStore& templates) {
  PromptRequest req;
  req.template_id = TemplateId::make_informative;
  req.rendered_text = TemplateStore::render(templates.get("make_informative"),
                                            {{"focus", focus.text}});
  return req;
}

}  // namespace facet
