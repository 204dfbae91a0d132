#pragma once

#include <random>
#include <string>
#include <vector>

#include "facet/types.hpp"

namespace facet::testutil {

// Minimal valid sextet: users a..f, gold {a,b,c}/{d,e,f}.
inline SampleSextet basic_sextet(const std::string& id = "s1") {
  SampleSextet s;
  s.sample_id = id;
  for (char c = 'a'; c <= 'f'; ++c) {
    UserRecord u;
    u.user_id = std::string(1, c);
    u.platform = Platform::reddit;
    u.raw_texts = {"text one from " + u.user_id, "text two from " + u.user_id};
    s.users.push_back(u);
    s.presentation_order.push_back(u.user_id);
  }
  s.gold_c1 = {"a", "b", "c"};
  s.gold_c2 = {"d", "e", "f"};
  s.topic_entities = {"topic"};
  return s;
}

// Randomized valid sextet for round-trip property tests.
inline SampleSextet random_sextet(std::mt19937_64& rng, int index) {
  SampleSextet s = basic_sextet("rnd-" + std::to_string(index));
  // shuffle presentation order (hand-rolled for cross-platform determinism)
  for (std::size_t i = s.presentation_order.size(); i > 1; --i) {
    std::swap(s.presentation_order[i - 1],
              s.presentation_order[rng() % i]);
  }
  if (rng() % 2) s.gold_focus_area = "Focus on item " + std::to_string(rng() % 100) + ".";
  s.split = static_cast<Split>(rng() % 3);
  for (auto& u : s.users) {
    u.platform = (rng() % 2) ? Platform::twitter : Platform::reddit;
    u.metadata["followers"] = std::to_string(rng() % 1000);
    if (rng() % 2) u.summary = "The user mentions thing " + std::to_string(rng() % 50) + ".";
    u.raw_texts.push_back("extra \"quoted\" text\nwith newline " + std::to_string(rng() % 9));
  }
  return s;
}

}  // namespace facet::testutil
