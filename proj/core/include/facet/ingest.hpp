#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "facet/rewards.hpp"
#include "facet/types.hpp"

namespace facet {

struct RedditComment {
  std::string user_id;  // platform-native id, anonymized during sextet build
  std::string text;
  int upvote_score = 0;
};

struct RedditPost {
  std::string post_id;
  std::string subreddit;
  std::string title;
  std::int64_t created_at = 0;  // epoch seconds
  std::vector<RedditComment> comments;
};

enum class TwiBotCategory { politics, business, entertainment, sports };

std::string to_string(TwiBotCategory c);
TwiBotCategory twibot_category_from_string(const std::string& s);

struct TwiBotUser {
  std::string user_id;
  TwiBotCategory category = TwiBotCategory::politics;
  bool is_bot = false;
  std::vector<std::string> tweets;
  std::map<std::string, std::string> metadata;
};

struct PostPair {
  RedditPost a;
  RedditPost b;
  std::set<std::string> shared_entities;
};

inline constexpr int kDefaultWindowDays = 21;
inline constexpr std::int64_t kSecondsPerDay = 86400;

// Pairs posts across the two subreddits whose titles share at least one
// entity and whose timestamps are within window_days (inclusive). Each post
// appears in at most one pair; candidates are taken greedily by time
// proximity.
std::vector<PostPair> pair_posts(const std::vector<RedditPost>& posts_a,
                                 const std::vector<RedditPost>& posts_b,
                                 const EntityExtractor& ner,
                                 int window_days = kDefaultWindowDays);

struct SextetBuildOptions {
  std::uint64_t seed = 0;
  std::string salt = "facet";
  int users_per_side = 3;
};

// Builds one sextet from a paired post. Qualifying commenters have strictly
// positive cumulative up-vote score over their comments on that post and do
// not appear in `used_users`. Returns nullopt when either side has fewer
// than users_per_side qualifying users. Chosen users' platform ids are
// appended to used_users.
std::optional<SampleSextet> build_reddit_sextet(
    const PostPair& pair, const SextetBuildOptions& options,
    std::set<std::string>& used_users);

// Full Reddit dataset build: pair, sample, assign splits. Users are unique
// across all emitted sextets, which makes the splits user-disjoint.
std::vector<SampleSextet> build_reddit_dataset(
    const std::vector<RedditPost>& posts_a,
    const std::vector<RedditPost>& posts_b, const EntityExtractor& ner,
    int window_days, const SextetBuildOptions& options,
    double train_frac = 0.8, double val_frac = 0.1);

// Groups users by category and emits sextets of 3 bots + 3 humans until a
// category runs out of either kind. Each user appears in at most one sextet.
std::vector<SampleSextet> build_twibot_sextets(
    const std::vector<TwiBotUser>& users, const SextetBuildOptions& options,
    double train_frac = 0.8, double val_frac = 0.1);

std::vector<RedditPost> load_reddit_dump(const std::filesystem::path& path);
std::vector<TwiBotUser> load_twibot_dump(const std::filesystem::path& path);

}  // namespace facet
