#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "facet/types.hpp"

namespace facet {

// JSONL dataset io. One sample per line, schema version "v1" in every line.
// Serialization validates every sample and round-trips losslessly.
void serialize_dataset(const std::vector<SampleSextet>& samples,
                       const std::filesystem::path& path);
std::vector<SampleSextet> deserialize_dataset(const std::filesystem::path& path);

std::string sextet_to_json_line(const SampleSextet& sample);
SampleSextet sextet_from_json_line(const std::string& line);

// Salted 64-bit FNV-1a over the platform-native id, hex encoded.
std::string anonymize_user_id(const std::string& platform_id,
                              const std::string& salt);

// Stable non-cryptographic digest used for cache keys and manifests.
std::uint64_t fnv1a64(const std::string& data);

}  // namespace facet
