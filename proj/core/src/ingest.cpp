#include "facet/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "facet/dataset.hpp"

namespace facet {

using nlohmann::json;

std::string to_string(TwiBotCategory c) {
  switch (c) {
    case TwiBotCategory::politics: return "politics";
    case TwiBotCategory::business: return "business";
    case TwiBotCategory::entertainment: return "entertainment";
    default: return "sports";
  }
}

TwiBotCategory twibot_category_from_string(const std::string& s) {
  if (s == "politics") return TwiBotCategory::politics;
  if (s == "business") return TwiBotCategory::business;
  if (s == "entertainment") return TwiBotCategory::entertainment;
  if (s == "sports") return TwiBotCategory::sports;
  throw ValidationError("unknown twibot category: " + s);
}

namespace {

std::set<std::string> title_entities(const RedditPost& post,
                                     const EntityExtractor& ner) {
  std::set<std::string> out;
  for (const auto& entity : ner(post.title)) out.insert(normalize_entity(entity));
  out.erase("");
  return out;
}

// Portable seeded Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = 0; i + 1 < items.size(); ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng() % (items.size() - i));
    std::swap(items[i], items[j]);
  }
}

}  // namespace

std::vector<PostPair> pair_posts(const std::vector<RedditPost>& posts_a,
                                 const std::vector<RedditPost>& posts_b,
                                 const EntityExtractor& ner, int window_days) {
  const std::int64_t window = static_cast<std::int64_t>(window_days) * kSecondsPerDay;

  struct Candidate {
    std::size_t ia, ib;
    std::int64_t dt;
    std::set<std::string> shared;
  };
  std::vector<Candidate> candidates;

  std::vector<std::set<std::string>> ents_a, ents_b;
  for (const auto& p : posts_a) ents_a.push_back(title_entities(p, ner));
  for (const auto& p : posts_b) ents_b.push_back(title_entities(p, ner));

  for (std::size_t i = 0; i < posts_a.size(); ++i) {
    for (std::size_t j = 0; j < posts_b.size(); ++j) {
      std::int64_t dt = std::llabs(posts_a[i].created_at - posts_b[j].created_at);
      if (dt > window) continue;
      std::set<std::string> shared;
      std::set_intersection(ents_a[i].begin(), ents_a[i].end(),
                            ents_b[j].begin(), ents_b[j].end(),
                            std::inserter(shared, shared.begin()));
      if (shared.empty()) continue;
      candidates.push_back({i, j, dt, std::move(shared)});
    }
  }

  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& x, const Candidate& y) {
              if (x.dt != y.dt) return x.dt < y.dt;
              if (posts_a[x.ia].post_id != posts_a[y.ia].post_id)
                return posts_a[x.ia].post_id < posts_a[y.ia].post_id;
              return posts_b[x.ib].post_id < posts_b[y.ib].post_id;
            });

  std::set<std::size_t> used_a, used_b;
  std::vector<PostPair> pairs;
  for (auto& c : candidates) {
    if (used_a.count(c.ia) || used_b.count(c.ib)) continue;
    used_a.insert(c.ia);
    used_b.insert(c.ib);
    pairs.push_back({posts_a[c.ia], posts_b[c.ib], std::move(c.shared)});
  }
  return pairs;
}

namespace {

struct SideUsers {
  // platform id -> (cumulative score, texts), ordered for determinism
  std::map<std::string, std::pair<int, std::vector<std::string>>> users;
};

SideUsers collect_side(const RedditPost& post) {
  SideUsers side;
  for (const auto& comment : post.comments) {
    auto& entry = side.users[comment.user_id];
    entry.first += comment.upvote_score;
    entry.second.push_back(comment.text);
  }
  return side;
}

std::vector<std::string> qualifying(const SideUsers& side,
                                    const std::set<std::string>& used) {
  std::vector<std::string> out;
  for (const auto& [id, entry] : side.users)
    if (entry.first > 0 && !entry.second.empty() && !used.count(id))
      out.push_back(id);
  return out;
}

}  // namespace

std::optional<SampleSextet> build_reddit_sextet(
    const PostPair& pair, const SextetBuildOptions& options,
    std::set<std::string>& used_users) {
  SideUsers side_a = collect_side(pair.a);
  SideUsers side_b = collect_side(pair.b);
  std::vector<std::string> pool_a = qualifying(side_a, used_users);
  std::vector<std::string> pool_b = qualifying(side_b, used_users);
  const std::size_t n = static_cast<std::size_t>(options.users_per_side);
  if (pool_a.size() < n || pool_b.size() < n) return std::nullopt;

  std::mt19937_64 rng(options.seed ^
                      fnv1a64(pair.a.post_id + "|" + pair.b.post_id));
  seeded_shuffle(pool_a, rng);
  seeded_shuffle(pool_b, rng);
  pool_a.resize(n);
  pool_b.resize(n);

  SampleSextet sample;
  sample.sample_id = "reddit-" + pair.a.post_id + "-" + pair.b.post_id;
  sample.topic_entities = pair.shared_entities;

  auto add_side = [&](const std::vector<std::string>& pool, SideUsers& side,
                      std::set<std::string>& gold) {
    for (const auto& platform_id : pool) {
      UserRecord user;
      user.user_id = anonymize_user_id(platform_id, options.salt);
      user.platform = Platform::reddit;
      user.raw_texts = side.users[platform_id].second;
      user.metadata["cumulative_upvotes"] =
          std::to_string(side.users[platform_id].first);
      gold.insert(user.user_id);
      sample.users.push_back(std::move(user));
      used_users.insert(platform_id);
    }
  };
  add_side(pool_a, side_a, sample.gold_c1);
  add_side(pool_b, side_b, sample.gold_c2);

  for (const auto& u : sample.users) sample.presentation_order.push_back(u.user_id);
  seeded_shuffle(sample.presentation_order, rng);
  validate(sample);
  return sample;
}

namespace {

void assign_splits(std::vector<SampleSextet>& samples, double train_frac,
                   double val_frac) {
  const std::size_t n = samples.size();
  const auto train_end = static_cast<std::size_t>(train_frac * n);
  const auto val_end = train_end + static_cast<std::size_t>(val_frac * n);
  for (std::size_t i = 0; i < n; ++i)
    samples[i].split = i < train_end  ? Split::train
                       : i < val_end ? Split::val
                                     : Split::test;
  std::sort(samples.begin(), samples.end(),
            [](const SampleSextet& a, const SampleSextet& b) {
              return a.sample_id < b.sample_id;
            });
}

}  // namespace

std::vector<SampleSextet> build_reddit_dataset(
    const std::vector<RedditPost>& posts_a,
    const std::vector<RedditPost>& posts_b, const EntityExtractor& ner,
    int window_days, const SextetBuildOptions& options, double train_frac,
    double val_frac) {
  std::vector<SampleSextet> samples;
  std::set<std::string> used_users;
  for (const auto& pair : pair_posts(posts_a, posts_b, ner, window_days))
    if (auto sample = build_reddit_sextet(pair, options, used_users))
      samples.push_back(std::move(*sample));
  assign_splits(samples, train_frac, val_frac);
  return samples;
}

std::vector<SampleSextet> build_twibot_sextets(
    const std::vector<TwiBotUser>& users, const SextetBuildOptions& options,
    double train_frac, double val_frac) {
  std::map<TwiBotCategory, std::pair<std::vector<const TwiBotUser*>,
                                     std::vector<const TwiBotUser*>>>
      by_category;  // bots, humans
  for (const auto& user : users) {
    if (user.tweets.empty()) continue;
    auto& bucket = by_category[user.category];
    (user.is_bot ? bucket.first : bucket.second).push_back(&user);
  }

  std::vector<SampleSextet> samples;
  for (auto& [category, bucket] : by_category) {
    auto& [bots, humans] = bucket;
    std::mt19937_64 rng(options.seed ^ fnv1a64(to_string(category)));
    seeded_shuffle(bots, rng);
    seeded_shuffle(humans, rng);

    const std::size_t n = static_cast<std::size_t>(options.users_per_side);
    std::size_t k = 0;
    while (bots.size() >= n && humans.size() >= n) {
      SampleSextet sample;
      sample.sample_id = "twibot-" + to_string(category) + "-" +
                         std::to_string(k++);
      auto take = [&](std::vector<const TwiBotUser*>& pool,
                      std::set<std::string>& gold) {
        for (std::size_t i = 0; i < n; ++i) {
          const TwiBotUser* src = pool.back();
          pool.pop_back();
          UserRecord user;
          user.user_id = anonymize_user_id(src->user_id, options.salt);
          user.platform = Platform::twitter;
          user.raw_texts = src->tweets;
          user.metadata = src->metadata;
          user.metadata["category"] = to_string(src->category);
          gold.insert(user.user_id);
          sample.users.push_back(std::move(user));
        }
      };
      take(bots, sample.gold_c1);
      take(humans, sample.gold_c2);
      for (const auto& u : sample.users)
        sample.presentation_order.push_back(u.user_id);
      seeded_shuffle(sample.presentation_order, rng);
      validate(sample);
      samples.push_back(std::move(sample));
    }
  }
  assign_splits(samples, train_frac, val_frac);
  return samples;
}

std::vector<RedditPost> load_reddit_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reddit dump: " + path.string());
  std::vector<RedditPost> posts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    RedditPost post;
    post.post_id = j.at("post_id").get<std::string>();
    post.subreddit = j.at("subreddit").get<std::string>();
    post.title = j.at("title").get<std::string>();
    post.created_at = j.at("created_at").get<std::int64_t>();
    for (const auto& jc : j.value("comments", json::array())) {
      RedditComment c;
      c.user_id = jc.at("user_id").get<std::string>();
      c.text = jc.at("text").get<std::string>();
      c.upvote_score = jc.at("score").get<int>();
      post.comments.push_back(std::move(c));
    }
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<TwiBotUser> load_twibot_dump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open twibot dump: " + path.string());
  json j = json::parse(in);
  std::vector<TwiBotUser> users;
  for (const auto& ju : j) {
    TwiBotUser user;
    user.user_id = ju.at("user_id").get<std::string>();
    user.category = twibot_category_from_string(ju.at("category").get<std::string>());
    user.is_bot = ju.at("is_bot").get<bool>();
    user.tweets = ju.value("tweets", std::vector<std::string>{});
    if (ju.contains("metadata"))
      user.metadata = ju.at("metadata").get<std::map<std::string, std::string>>();
    users.push_back(std::move(user));
  }
  return users;
}

}  // namespace facet
