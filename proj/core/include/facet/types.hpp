#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace facet {

// Thrown when a record violates a domain invariant. The message names the
// offending sample/field so callers can locate the bad line in a dataset.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Platform { reddit, twitter };
enum class Split { train, val, test };

std::string to_string(Platform p);
std::string to_string(Split s);
Platform platform_from_string(const std::string& s);
Split split_from_string(const std::string& s);

// One social-media user: anonymized id, raw posts, metadata, and the
// generated summary once it exists.
struct UserRecord {
  std::string user_id;
  Platform platform = Platform::reddit;
  std::vector<std::string> raw_texts;
  std::map<std::string, std::string> metadata;
  std::optional<std::string> summary;
};

// One sample: six users split into two gold communities of three, plus the
// shared-topic provenance and optional gold focus area.
struct SampleSextet {
  std::string sample_id;
  std::vector<UserRecord> users;  // exactly 6
  std::set<std::string> gold_c1;
  std::set<std::string> gold_c2;
  std::set<std::string> topic_entities;
  std::optional<std::string> gold_focus_area;
  std::vector<std::string> presentation_order;  // permutation of the 6 ids
  Split split = Split::train;
};

enum class FocusSource { gold_llm, supervised_model, rl_model, none };

std::string to_string(FocusSource s);
FocusSource focus_source_from_string(const std::string& s);

struct FocusArea {
  std::string text;
  FocusSource source = FocusSource::none;

  static FocusArea absent() { return {"", FocusSource::none}; }
};

// Parsed detection output: the single predicted community and the remainder.
struct CommunityPrediction {
  std::set<std::string> community;
  std::set<std::string> remainder;
  std::string raw_response;
  int dropped_ids = 0;       // ids in the response outside the valid set
  bool parse_warning = false;  // no separator found
};

struct RewardVector {
  double rf1_coverage = 0.0;
  double rf2_entity = 0.0;
  double rf3_informativeness = 0.0;
  double rf4_length = 0.0;
  double rouge = 0.0;
  double combined = 0.0;
};

// Throws ValidationError naming the sample and field on any invariant break.
void validate(const UserRecord& user);
void validate(const SampleSextet& sample);

}  // namespace facet
