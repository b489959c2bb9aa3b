#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "fairgen/allocate.hpp"
#include "fairgen/distribution.hpp"
#include "fairgen/target.hpp"

namespace fairgen {

// Artifacts use ordered JSON so reruns produce byte-identical files.
using Json = nlohmann::ordered_json;

Json to_json(const AttributeScheme& scheme);
AttributeScheme scheme_from_json(const Json& j);

Json to_json(const Distribution& d);
Distribution distribution_from_json(const Json& j);

Json to_json(const TargetSetting& t);
TargetSetting target_setting_from_json(const Json& j);

Json to_json(const AllocationPlan& plan);
AllocationPlan allocation_from_json(const Json& j);

// File helpers. Writes are atomic-ish (tmp file + rename) and end with '\n'.
Json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const Json& j);

// Removes volatile fields ("created_at", "timestamp") at every nesting level
// so artifacts from repeated runs can be compared byte for byte.
Json strip_volatile(Json j);

// Accessors that raise Errc::schema_violation instead of nlohmann exceptions.
const Json& require(const Json& j, const std::string& key);
std::string require_string(const Json& j, const std::string& key);
double require_number(const Json& j, const std::string& key);

} // namespace fairgen
