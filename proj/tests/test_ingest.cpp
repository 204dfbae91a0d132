#include <fstream>

#include "doctest.h"
#include "facet/dataset.hpp"
#include "facet/ingest.hpp"

using namespace facet;

namespace {

RedditPost make_post(std::string id, std::string title, std::int64_t created_at,
                     int commenters = 0) {
  RedditPost p;
  p.post_id = std::move(id);
  p.subreddit = "sub";
  p.title = std::move(title);
  p.created_at = created_at;
  for (int i = 0; i < commenters; ++i)
    p.comments.push_back({p.post_id + "_user" + std::to_string(i),
                          "comment about " + p.title, 2});
  return p;
}

const EntityExtractor kNer = dictionary_extractor({"gun bill", "budget"});

}  // namespace

TEST_CASE("pair_posts pairs shared-entity titles within 21 days") {
  auto a = make_post("a1", "Trump signs gun bill", 0);
  auto b = make_post("b1", "Senate debates gun bill", 10 * kSecondsPerDay);
  auto pairs = pair_posts({a}, {b}, kNer);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].a.post_id == "a1");
  CHECK(pairs[0].b.post_id == "b1");
  CHECK(pairs[0].shared_entities == std::set<std::string>{"gun bill"});
}

TEST_CASE("pair_posts enforces the 21-day window inclusively") {
  auto a = make_post("a1", "gun bill news", 0);
  auto late = make_post("b1", "gun bill recap", 25 * kSecondsPerDay);
  CHECK(pair_posts({a}, {late}, kNer).empty());

  auto edge = make_post("b2", "gun bill recap", 21 * kSecondsPerDay);
  CHECK(pair_posts({a}, {edge}, kNer).size() == 1);
}

TEST_CASE("pair_posts requires a shared title entity") {
  auto a = make_post("a1", "gun bill news", 0);
  auto b = make_post("b1", "budget update", 0);
  CHECK(pair_posts({a}, {b}, kNer).empty());
}

TEST_CASE("pair_posts dedups greedily by time proximity") {
  auto a1 = make_post("a1", "gun bill news", 0);
  auto b_near = make_post("b1", "gun bill take", 1 * kSecondsPerDay);
  auto b_far = make_post("b2", "gun bill take two", 5 * kSecondsPerDay);
  auto pairs = pair_posts({a1}, {b_near, b_far}, kNer);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].b.post_id == "b1");

  // each post in at most one pair
  auto a2 = make_post("a2", "gun bill follow-up", 2 * kSecondsPerDay);
  auto multi = pair_posts({a1, a2}, {b_near, b_far}, kNer);
  CHECK(multi.size() == 2);
  std::set<std::string> used_b = {multi[0].b.post_id, multi[1].b.post_id};
  CHECK(used_b.size() == 2);
}

TEST_CASE("reddit sextet: 3 per side sampled deterministically") {
  PostPair pair{make_post("a1", "gun bill", 0, 5),
                make_post("b1", "gun bill", 0, 5),
                {"gun bill"}};
  SextetBuildOptions options;
  options.seed = 11;

  std::set<std::string> used1, used2;
  auto s1 = build_reddit_sextet(pair, options, used1);
  auto s2 = build_reddit_sextet(pair, options, used2);
  REQUIRE(s1.has_value());
  REQUIRE(s2.has_value());
  CHECK(sextet_to_json_line(*s1) == sextet_to_json_line(*s2));
  CHECK(s1->users.size() == 6);
  CHECK(s1->gold_c1.size() == 3);
  CHECK(s1->gold_c2.size() == 3);
  CHECK(used1.size() == 6);  // platform ids of the chosen users
  CHECK_NOTHROW(validate(*s1));
}

TEST_CASE("reddit sextet: cumulative upvote score decides qualification") {
  auto post_a = make_post("a1", "gun bill", 0, 3);
  // a 4th commenter with scores (+2, -3): cumulative -1 -> excluded
  post_a.comments.push_back({"mixed_user", "first comment", 2});
  post_a.comments.push_back({"mixed_user", "second comment", -3});
  PostPair pair{post_a, make_post("b1", "gun bill", 0, 3), {"gun bill"}};

  SextetBuildOptions options;
  std::set<std::string> used;
  auto s = build_reddit_sextet(pair, options, used);
  REQUIRE(s.has_value());
  CHECK(used.count("mixed_user") == 0);
  for (const auto& u : s->users)
    CHECK(u.user_id != anonymize_user_id("mixed_user", options.salt));
}

TEST_CASE("reddit sextet: fewer than 3 qualifying users on a side -> none") {
  PostPair pair{make_post("a1", "gun bill", 0, 2),
                make_post("b1", "gun bill", 0, 5),
                {"gun bill"}};
  SextetBuildOptions options;
  std::set<std::string> used;
  CHECK_FALSE(build_reddit_sextet(pair, options, used).has_value());
  CHECK(used.empty());
}

TEST_CASE("reddit sextet: users already consumed are not reused") {
  PostPair pair{make_post("a1", "gun bill", 0, 3),
                make_post("b1", "gun bill", 0, 3),
                {"gun bill"}};
  SextetBuildOptions options;
  std::set<std::string> used;
  REQUIRE(build_reddit_sextet(pair, options, used).has_value());
  // all six consumed; a second sextet from the same posts is impossible
  CHECK_FALSE(build_reddit_sextet(pair, options, used).has_value());
}

TEST_CASE("reddit dataset: deterministic bytes and user-disjoint splits") {
  std::vector<RedditPost> side_a, side_b;
  for (int i = 0; i < 12; ++i) {
    side_a.push_back(make_post("a" + std::to_string(i), "gun bill item",
                               i * 30 * kSecondsPerDay, 4));
    side_b.push_back(make_post("b" + std::to_string(i), "gun bill reply",
                               i * 30 * kSecondsPerDay, 4));
  }
  SextetBuildOptions options;
  options.seed = 5;
  auto d1 = build_reddit_dataset(side_a, side_b, kNer, 21, options);
  auto d2 = build_reddit_dataset(side_a, side_b, kNer, 21, options);
  REQUIRE(d1.size() == 12);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i)
    CHECK(sextet_to_json_line(d1[i]) == sextet_to_json_line(d2[i]));

  std::map<Split, std::set<std::string>> users_by_split;
  std::map<Split, int> counts;
  for (const auto& s : d1) {
    ++counts[s.split];
    for (const auto& u : s.users) users_by_split[s.split].insert(u.user_id);
  }
  CHECK(counts[Split::train] == 9);
  CHECK(counts[Split::val] == 1);
  CHECK(counts[Split::test] == 2);
  for (const auto& id : users_by_split[Split::test]) {
    CHECK(users_by_split[Split::train].count(id) == 0);
    CHECK(users_by_split[Split::val].count(id) == 0);
  }
}

namespace {

std::vector<TwiBotUser> twibot_users(TwiBotCategory cat, int bots, int humans) {
  std::vector<TwiBotUser> users;
  for (int i = 0; i < bots + humans; ++i) {
    TwiBotUser u;
    u.user_id = to_string(cat) + "_u" + std::to_string(i);
    u.category = cat;
    u.is_bot = i < bots;
    u.tweets = {"tweet from " + u.user_id};
    users.push_back(u);
  }
  return users;
}

}  // namespace

TEST_CASE("twibot: six users of one category make exactly one sextet") {
  auto users = twibot_users(TwiBotCategory::politics, 3, 3);
  auto samples = build_twibot_sextets(users, {});
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].gold_c1.size() == 3);  // bots
  CHECK(samples[0].gold_c2.size() == 3);  // humans
  CHECK_NOTHROW(validate(samples[0]));
  for (const auto& u : samples[0].users)
    CHECK(u.metadata.at("category") == "politics");
}

TEST_CASE("twibot: categories never mix and exhaustion stops emission") {
  auto users = twibot_users(TwiBotCategory::politics, 4, 3);
  auto sports = twibot_users(TwiBotCategory::sports, 3, 2);  // humans short
  users.insert(users.end(), sports.begin(), sports.end());

  auto samples = build_twibot_sextets(users, {});
  REQUIRE(samples.size() == 1);  // politics fits once; sports lacks humans
  for (const auto& u : samples[0].users)
    CHECK(u.metadata.at("category") == "politics");
}

TEST_CASE("twibot: users unique across sextets") {
  auto users = twibot_users(TwiBotCategory::business, 7, 8);
  auto samples = build_twibot_sextets(users, {});
  REQUIRE(samples.size() == 2);
  std::set<std::string> seen;
  for (const auto& s : samples)
    for (const auto& u : s.users) CHECK(seen.insert(u.user_id).second);
}

TEST_CASE("dump loaders parse the documented formats") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "facet_test_dumps";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "reddit.jsonl");
    out << R"({"post_id":"p1","subreddit":"s","title":"gun bill","created_at":100,)"
        << R"("comments":[{"user_id":"u1","text":"hi","score":3}]})" << "\n";
  }
  auto posts = load_reddit_dump(dir / "reddit.jsonl");
  REQUIRE(posts.size() == 1);
  CHECK(posts[0].comments[0].upvote_score == 3);

  {
    std::ofstream out(dir / "twibot.json");
    out << R"([{"user_id":"t1","category":"sports","is_bot":true,"tweets":["x"]}])";
  }
  auto users = load_twibot_dump(dir / "twibot.json");
  REQUIRE(users.size() == 1);
  CHECK(users[0].category == TwiBotCategory::sports);
  CHECK(users[0].is_bot);
}
