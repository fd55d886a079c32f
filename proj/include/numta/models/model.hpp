#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "numta/nn/blocks.hpp"
#include "numta/preprocess/preprocess.hpp"

namespace numta {

enum class BackboneKind { resnet50, inceptionv3, efficientnetb0, desk_resnet, desk_inception, desk_efficientnet };

std::string_view to_string(BackboneKind kind);
/// Throws UnsupportedKind.
BackboneKind parse_backbone_kind(std::string_view text);
bool is_desk(BackboneKind kind);
const std::vector<BackboneKind>& all_backbone_kinds();

struct WeightInit {
  enum class Source { random, pretrained };
  Source source = Source::random;
  std::uint64_t seed = 0;
  std::filesystem::path archive;  // pretrained only
};

/// Input geometry and head of an adapted backbone. The head is always
/// global-average-pool -> dense(num_classes) -> softmax.
struct ModelConfig {
  std::size_t input_height = kInputSize;
  std::size_t input_width = kInputSize;
  std::size_t input_channels = 3;
  std::size_t num_classes = 10;
  WeightInit weight_init;

  /// Throws ConfigError unless the geometry is 96x96x3 with ten classes.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct ParameterSummary {
  std::size_t total = 0;
  std::size_t trainable = 0;
  std::map<std::string, std::size_t> per_layer;  // owning layer path -> count
};

/// A backbone plus its classification head. Inference-phase forward calls do
/// not mutate the model and may run concurrently; training needs exclusive access.
class Model {
 public:
  static constexpr std::string_view kHeadPrefix = "fc.";

  Model(BackboneKind kind, ModelConfig config, std::unique_ptr<nn::Sequential> net);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  BackboneKind kind() const { return kind_; }
  const ModelConfig& config() const { return config_; }

  /// NCHW input -> [N, num_classes] logits.
  Tensor forward_logits(const Tensor& input, nn::Phase phase);
  /// Back-propagates d(loss)/d(logits) through the last train-phase forward.
  Tensor backward(const Tensor& dlogits);
  /// Every parameter and buffer, in a stable order.
  std::vector<nn::ParamRef> parameters();
  void release();

  static bool is_head(std::string_view name) { return name.starts_with(kHeadPrefix); }

 private:
  BackboneKind kind_;
  ModelConfig config_;
  std::unique_ptr<nn::Sequential> net_;
};

/// Builds the adapted architecture and initialises it:
/// He-normal convolution kernels, N(0, 1/fan_in) dense head, zero biases,
/// unit/zero normalisation. A pretrained config then loads its archive.
Model build_model(BackboneKind kind, const ModelConfig& config = {});

/// Inference-phase class probabilities, [N, num_classes].
Tensor forward(Model& model, const TensorBatch& batch);

/// Row-wise softmax of a [N, K] matrix.
Tensor softmax_rows(const Tensor& logits);

ParameterSummary parameter_count(Model& model);

/// Re-draws every parameter from the initialisation scheme.
void initialize_parameters(Model& model, std::uint64_t seed);

}  // namespace numta
