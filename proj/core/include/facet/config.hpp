#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "facet/trainer.hpp"

namespace facet {

// INI-style key/value config with [section] headers and # comments.
class IniFile {
 public:
  static IniFile parse(const std::string& text);
  static IniFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // "section.key" -> value
};

struct RunConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path cache_path;
  std::filesystem::path checkpoints_dir;
  std::filesystem::path templates_dir;
  std::filesystem::path rules_path;  // scripted-mock rule table

  std::string backend_kind = "scripted-mock";  // scripted-mock|replay|http
  std::string http_url;
  std::string http_model;
  std::string token_env = "FACET_API_TOKEN";

  std::uint64_t seed = 0;
  std::string salt = "facet";
  double rouge_share = 0.25;

  TrainConfig train;

  std::map<std::string, std::string> raw;

  static RunConfig from_ini(const IniFile& ini);
  static RunConfig load(const std::filesystem::path& path);

  // Throws ValidationError naming the offending field when a referenced
  // input path does not exist.
  void validate_paths() const;

  // Stable digest over the raw key/value pairs, recorded in run manifests.
  std::string hash() const;
};

}  // namespace facet
