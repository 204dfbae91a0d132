#include "facet/config.hpp"

#include <fstream>
#include <sstream>

#include "facet/dataset.hpp"

namespace facet {

IniFile IniFile::parse(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("malformed config line: " + line);
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? "" : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    ini.values_[section.empty() ? key : section + "." + key] = value;
  }
  return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string IniFile::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double IniFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

int IniFile::get_int(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoi(it->second);
}

std::uint64_t IniFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoull(it->second);
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
  RunConfig cfg;
  cfg.raw = ini.values();
  cfg.dataset_path = ini.get("paths.dataset");
  cfg.cache_path = ini.get("paths.cache");
  cfg.checkpoints_dir = ini.get("paths.checkpoints");
  cfg.templates_dir = ini.get("paths.templates");
  cfg.rules_path = ini.get("paths.rules");

  cfg.backend_kind = ini.get("backend.kind", cfg.backend_kind);
  cfg.http_url = ini.get("backend.url");
  cfg.http_model = ini.get("backend.model");
  cfg.token_env = ini.get("backend.token_env", cfg.token_env);

  cfg.seed = ini.get_u64("run.seed", cfg.seed);
  cfg.salt = ini.get("run.salt", cfg.salt);
  cfg.rouge_share = ini.get_double("rewards.rouge_share", cfg.rouge_share);

  cfg.train.sl.max_prompt_len =
      ini.get_int("sl.max_prompt_len", cfg.train.sl.max_prompt_len);
  cfg.train.sl.epochs = ini.get_int("sl.epochs", cfg.train.sl.epochs);
  cfg.train.sl.lr = ini.get_double("sl.lr", cfg.train.sl.lr);
  cfg.train.sl.weight_decay =
      ini.get_double("sl.weight_decay", cfg.train.sl.weight_decay);

  cfg.train.rl.lr = ini.get_double("rl.lr", cfg.train.rl.lr);
  cfg.train.rl.entropy_coef =
      ini.get_double("rl.entropy_coef", cfg.train.rl.entropy_coef);
  cfg.train.rl.target_kl = ini.get_double("rl.target_kl", cfg.train.rl.target_kl);
  cfg.train.rl.clip_ratio =
      ini.get_double("rl.clip_ratio", cfg.train.rl.clip_ratio);
  cfg.train.rl.batch_size = ini.get_int("rl.batch_size", cfg.train.rl.batch_size);
  cfg.train.rl.update_epochs =
      ini.get_int("rl.update_epochs", cfg.train.rl.update_epochs);
  cfg.train.rl.iterations = ini.get_int("rl.iterations", cfg.train.rl.iterations);
  cfg.train.rl.seed = ini.get_u64("rl.seed", cfg.seed);

  cfg.train.patience = ini.get_int("curriculum.patience", cfg.train.patience);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_ini(IniFile::load(path));
}

void RunConfig::validate_paths() const {
  auto check = [](const std::filesystem::path& p, const std::string& field) {
    if (!p.empty() && !std::filesystem::exists(p))
      throw ValidationError("config field " + field + ": path does not exist: " +
                            p.string());
  };
  check(dataset_path, "paths.dataset");
  check(templates_dir, "paths.templates");
  check(rules_path, "paths.rules");
}

std::string RunConfig::hash() const {
  std::ostringstream material;
  for (const auto& [key, value] : raw) material << key << "=" << value << "\n";
  std::ostringstream out;
  out << std::hex << fnv1a64(material.str());
  return out.str();
}

}  // namespace facet
