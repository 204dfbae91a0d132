#include "facet/types.hpp"

#include <algorithm>

namespace facet {

std::string to_string(Platform p) {
  return p == Platform::reddit ? "reddit" : "twitter";
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    default: return "test";
  }
}

Platform platform_from_string(const std::string& s) {
  if (s == "reddit") return Platform::reddit;
  if (s == "twitter") return Platform::twitter;
  throw ValidationError("unknown platform: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw ValidationError("unknown split: " + s);
}

std::string to_string(FocusSource s) {
  switch (s) {
    case FocusSource::gold_llm: return "gold_llm";
    case FocusSource::supervised_model: return "supervised_model";
    case FocusSource::rl_model: return "rl_model";
    default: return "none";
  }
}

FocusSource focus_source_from_string(const std::string& s) {
  if (s == "gold_llm") return FocusSource::gold_llm;
  if (s == "supervised_model") return FocusSource::supervised_model;
  if (s == "rl_model") return FocusSource::rl_model;
  if (s == "none") return FocusSource::none;
  throw ValidationError("unknown focus source: " + s);
}

void validate(const UserRecord& user) {
  if (user.user_id.empty())
    throw ValidationError("user_id is empty");
  if (user.raw_texts.empty())
    throw ValidationError("user " + user.user_id + ": raw_texts is empty");
  if (user.summary && user.summary->empty())
    throw ValidationError("user " + user.user_id + ": summary set but empty");
}

void validate(const SampleSextet& sample) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw ValidationError("sample " + sample.sample_id + ": " + field + " " + why);
  };
  if (sample.sample_id.empty())
    throw ValidationError("sample_id is empty");
  if (sample.users.size() != 6) fail("users", "must have exactly 6 entries");

  std::set<std::string> ids;
  for (const auto& u : sample.users) {
    validate(u);
    if (!ids.insert(u.user_id).second) fail("users", "duplicate id " + u.user_id);
  }
  if (sample.gold_c1.size() != 3) fail("gold_c1", "must have exactly 3 ids");
  if (sample.gold_c2.size() != 3) fail("gold_c2", "must have exactly 3 ids");

  std::set<std::string> overlap;
  std::set_intersection(sample.gold_c1.begin(), sample.gold_c1.end(),
                        sample.gold_c2.begin(), sample.gold_c2.end(),
                        std::inserter(overlap, overlap.begin()));
  if (!overlap.empty()) fail("gold_c1/gold_c2", "overlap");

  std::set<std::string> joined = sample.gold_c1;
  joined.insert(sample.gold_c2.begin(), sample.gold_c2.end());
  if (joined != ids) fail("gold_c1/gold_c2", "union must equal the 6 user ids");

  if (sample.presentation_order.size() != 6)
    fail("presentation_order", "must list the 6 ids");
  std::set<std::string> order(sample.presentation_order.begin(),
                              sample.presentation_order.end());
  if (order != ids) fail("presentation_order", "must be a permutation of the 6 ids");
}

}  // namespace facet
