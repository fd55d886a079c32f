#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "numta/datasetio/dataset.hpp"
#include "numta/models/model.hpp"
#include "numta/preprocess/augment.hpp"
#include "numta/preprocess/preprocess.hpp"
#include "numta/training/trainer.hpp"

namespace numta {

/// One experiment, read from a JSON file. Example:
///   {"name": "effnet", "dataset_root": "data/numta", "sources": "abcde",
///    "subsample": 17022, "split": {"seed": 1, "train_fraction": 0.8, "newdata_fraction": 0.5},
///    "model": "efficientnetb0", "pretrained": "weights/efficientnetb0.ntc", "init_seed": 0,
///    "preprocess": {"mode": "caffe"}, "train": {"learning_rate": 1e-4, "epochs": 20},
///    "output_dir": "runs"}
/// Everything but "name" and "model" has a default. The dataset root falls back
/// to $NUMTA_ROOT; the batch size to 32 (64 for efficientnetb0).
struct RunConfig {
  std::string name;
  std::filesystem::path dataset_root;
  std::set<char> sources{'a', 'b', 'c', 'd', 'e', 'f'};
  std::size_t subsample = 0;  // 0 keeps every cleaned record
  SplitSpec split;
  BackboneKind model = BackboneKind::efficientnetb0;
  std::optional<std::filesystem::path> pretrained;
  std::uint64_t init_seed = 0;
  PreprocessMode preprocess;
  std::optional<AugmentSpec> augment;
  nlohmann::json augment_source;  // the augment block as written, donor path included
  TrainConfig train;
  std::filesystem::path output_dir = "runs";
  CsvColumns csv;

  std::filesystem::path run_dir() const { return output_dir / name; }
  ModelConfig model_config() const;
  /// Throws ConfigError.
  void validate() const;
};

std::size_t default_batch_size(BackboneKind kind);

/// `env_root` stands in for $NUMTA_ROOT when the file has no dataset_root.
RunConfig run_config_from_json(const nlohmann::json& j, const std::optional<std::string>& env_root);
nlohmann::json to_json(const RunConfig& config);
/// Reads the file and consults $NUMTA_ROOT. Throws ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const AugmentSpec& spec);
AugmentSpec augment_spec_from_json(const nlohmann::json& j);

}  // namespace numta
