#include "facet/dataset.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace facet {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string anonymize_user_id(const std::string& platform_id,
                              const std::string& salt) {
  std::uint64_t h = fnv1a64(salt + "\x1f" + platform_id);
  std::ostringstream out;
  out << "u" << std::hex << h;
  return out.str();
}

static json user_to_json(const UserRecord& u) {
  json j;
  j["user_id"] = u.user_id;
  j["platform"] = to_string(u.platform);
  j["raw_texts"] = u.raw_texts;
  j["metadata"] = u.metadata;
  if (u.summary) j["summary"] = *u.summary;
  return j;
}

static UserRecord user_from_json(const json& j) {
  UserRecord u;
  u.user_id = j.at("user_id").get<std::string>();
  u.platform = platform_from_string(j.at("platform").get<std::string>());
  u.raw_texts = j.at("raw_texts").get<std::vector<std::string>>();
  if (j.contains("metadata"))
    u.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  if (j.contains("summary")) u.summary = j.at("summary").get<std::string>();
  return u;
}

std::string sextet_to_json_line(const SampleSextet& sample) {
  validate(sample);
  json j;
  j["schema"] = "v1";
  j["sample_id"] = sample.sample_id;
  j["split"] = to_string(sample.split);
  j["users"] = json::array();
  for (const auto& u : sample.users) j["users"].push_back(user_to_json(u));
  j["gold_c1"] = sample.gold_c1;
  j["gold_c2"] = sample.gold_c2;
  j["topic_entities"] = sample.topic_entities;
  if (sample.gold_focus_area) j["gold_focus_area"] = *sample.gold_focus_area;
  j["presentation_order"] = sample.presentation_order;
  return j.dump();
}

SampleSextet sextet_from_json_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed JSONL line: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"] != "v1")
    throw ValidationError("unsupported or missing schema version");
  SampleSextet s;
  try {
    s.sample_id = j.at("sample_id").get<std::string>();
    s.split = split_from_string(j.at("split").get<std::string>());
    for (const auto& ju : j.at("users")) s.users.push_back(user_from_json(ju));
    s.gold_c1 = j.at("gold_c1").get<std::set<std::string>>();
    s.gold_c2 = j.at("gold_c2").get<std::set<std::string>>();
    s.topic_entities = j.at("topic_entities").get<std::set<std::string>>();
    if (j.contains("gold_focus_area"))
      s.gold_focus_area = j.at("gold_focus_area").get<std::string>();
    s.presentation_order =
        j.at("presentation_order").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError("sample " + s.sample_id + ": bad field: " + e.what());
  }
  validate(s);
  return s;
}

void serialize_dataset(const std::vector<SampleSextet>& samples,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& s : samples) out << sextet_to_json_line(s) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<SampleSextet> deserialize_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<SampleSextet> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    samples.push_back(sextet_from_json_line(line));
  }
  return samples;
}

}  // namespace facet
