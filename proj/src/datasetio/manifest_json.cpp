#include "numta/datasetio/manifest_json.hpp"

#include <fstream>

#include "numta/core/errors.hpp"

namespace numta {

using nlohmann::json;

json to_json(const SampleRecord& r) {
  return {{"id", r.id},
          {"path", r.image_path.string()},
          {"label", r.label ? json(*r.label) : json(nullptr)},
          {"source_tag", std::string(1, r.source_tag)}};
}

json to_json(const DatasetManifest& m) {
  json records = json::array();
  for (const auto& r : m.records()) records.push_back(to_json(r));
  json counts = json::object();
  for (const auto& [label, n] : m.class_counts()) counts[std::to_string(label)] = n;
  json prov = json::object();
  for (const auto& [tag, n] : m.provenance()) prov[std::string(1, tag)] = n;
  json errors = json::array();
  for (const auto& e : m.row_errors()) errors.push_back({{"source", e.source}, {"line", e.line}, {"message", e.message}});
  return {{"records", records}, {"class_counts", counts}, {"provenance", prov}, {"row_errors", errors}};
}

json to_json(const CleanLog& log) {
  return {{"dropped_missing_label", log.dropped_missing_label},
          {"dropped_missing_file", log.dropped_missing_file},
          {"dropped_unreadable", log.dropped_unreadable},
          {"kept", log.kept}};
}

json to_json(const SplitSpec& s) {
  return {{"seed", s.seed},
          {"train_fraction", s.train_fraction},
          {"newdata_fraction", s.newdata_fraction},
          {"stratified", s.stratified}};
}

json to_json(const SplitResult& s) {
  return {{"train", to_json(s.train)}, {"test", to_json(s.test)}, {"new_data", to_json(s.new_data)}};
}

SampleRecord record_from_json(const json& j) {
  try {
    SampleRecord r;
    r.id = j.at("id").get<std::string>();
    r.image_path = j.at("path").get<std::string>();
    if (!j.at("label").is_null()) r.label = j.at("label").get<int>();
    const auto tag = j.at("source_tag").get<std::string>();
    if (tag.size() != 1) throw DataError("source_tag must be one character");
    r.source_tag = tag[0];
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    std::vector<SampleRecord> records;
    for (const auto& r : j.at("records")) records.push_back(record_from_json(r));
    std::vector<RowError> errors;
    if (j.contains("row_errors"))
      for (const auto& e : j.at("row_errors"))
        errors.push_back({e.at("source").get<std::string>(), e.at("line").get<std::size_t>(),
                          e.at("message").get<std::string>()});
    return DatasetManifest(std::move(records), std::move(errors));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

CleanLog clean_log_from_json(const json& j) {
  try {
    return {j.at("dropped_missing_label").get<std::size_t>(), j.at("dropped_missing_file").get<std::size_t>(),
            j.at("dropped_unreadable").get<std::size_t>(), j.at("kept").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed clean log: ") + e.what());
  }
}

SplitSpec split_spec_from_json(const json& j) {
  SplitSpec s;
  try {
    s.seed = j.value("seed", s.seed);
    s.train_fraction = j.value("train_fraction", s.train_fraction);
    s.newdata_fraction = j.value("newdata_fraction", s.newdata_fraction);
    s.stratified = j.value("stratified", s.stratified);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed split spec: ") + e.what());
  }
  return s;
}

SplitResult split_from_json(const json& j) {
  try {
    return {manifest_from_json(j.at("train")), manifest_from_json(j.at("test")), manifest_from_json(j.at("new_data"))};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed split: ") + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace numta
