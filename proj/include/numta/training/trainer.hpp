#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "numta/models/model.hpp"
#include "numta/training/adam.hpp"
#include "numta/training/data_loader.hpp"

namespace numta {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  bool shuffle = true;  // reshuffle every epoch
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  /// Throws ConfigError. A zero learning rate is accepted (it freezes the model).
  void validate() const;
  AdamConfig adam() const { return {learning_rate, beta1, beta2, epsilon}; }
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig defaults = {});

/// Per-epoch series, index 0 is epoch 1.
struct EpochHistory {
  std::vector<double> train_loss;
  std::vector<double> train_accuracy;
  std::vector<double> test_loss;
  std::vector<double> test_accuracy;

  std::size_t size() const { return train_loss.size(); }
  bool empty() const { return train_loss.empty(); }
  /// Throws DataError if the series differ in length or leave their ranges.
  void validate() const;
  bool operator==(const EpochHistory&) const = default;
};

struct TrainedModel {
  Model model;
  EpochHistory history;
  TrainConfig config;
  double wall_time = 0.0;  // seconds
  std::optional<std::string> error;  // set when training aborted; history is then partial

  bool failed() const { return error.has_value(); }
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochHistory&)>;

/// Mini-batch Adam on categorical cross-entropy. Train loss/accuracy of an epoch
/// are sample-weighted means over its batches; test loss/accuracy come from a
/// full inference pass over `eval_set` afterwards. A non-finite loss stops the
/// run and is reported through TrainedModel::error.
TrainedModel train(Model model, const ImageSet& train_set, const ImageSet& eval_set, const TrainConfig& config,
                   const PreprocessMode& mode, const AugmentSpec* augment = nullptr,
                   const EpochCallback& on_epoch = {});

/// Manifest form. Throws DataError if the sets share an id.
TrainedModel train(Model model, const DatasetManifest& train_set, const DatasetManifest& eval_set,
                   const TrainConfig& config, const PreprocessMode& mode, const AugmentSpec* augment = nullptr,
                   const EpochCallback& on_epoch = {});

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and accuracy over the whole set. Throws EmptyDatasetError.
LossAccuracy evaluate_loss_acc(Model& model, const ImageSet& set, const PreprocessMode& mode,
                               std::size_t batch_size = 32);
LossAccuracy evaluate_loss_acc(Model& model, const DatasetManifest& set, const PreprocessMode& mode,
                               std::size_t batch_size = 32);

struct Predictions {
  std::vector<int> y_true;
  std::vector<int> y_pred;
};

/// Arg-max labels in set order; ties go to the lowest class. Throws EmptyDatasetError.
Predictions predict_labels(Model& model, const ImageSet& set, const PreprocessMode& mode,
                           std::size_t batch_size = 32);
Predictions predict_labels(Model& model, const DatasetManifest& set, const PreprocessMode& mode,
                           std::size_t batch_size = 32);

/// Lowest index of the row maximum.
int argmax(const Scalar* row, std::size_t k);

/// Cross-entropy of softmax(logits) against labels: returns the summed loss and
/// writes d(mean loss)/d(logits) into `grad` when it is non-null.
double cross_entropy(const Tensor& logits, std::span<const int> labels, Tensor* grad, std::size_t* correct = nullptr);

}  // namespace numta
