#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "numta/datasetio/dataset.hpp"

namespace numta {

nlohmann::json to_json(const SampleRecord& record);
nlohmann::json to_json(const DatasetManifest& manifest);
nlohmann::json to_json(const CleanLog& log);
nlohmann::json to_json(const SplitSpec& spec);
nlohmann::json to_json(const SplitResult& split);

SampleRecord record_from_json(const nlohmann::json& j);
DatasetManifest manifest_from_json(const nlohmann::json& j);
CleanLog clean_log_from_json(const nlohmann::json& j);
SplitSpec split_spec_from_json(const nlohmann::json& j);
SplitResult split_from_json(const nlohmann::json& j);

/// Pretty-printed JSON file helpers; both throw IoError.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace numta
