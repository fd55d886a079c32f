#include "numta/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "builders.hpp"
#include "numta/core/errors.hpp"
#include "numta/models/archive.hpp"

namespace numta {

namespace {

struct KindName {
  BackboneKind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {BackboneKind::resnet50, "resnet50"},
    {BackboneKind::inceptionv3, "inceptionv3"},
    {BackboneKind::efficientnetb0, "efficientnetb0"},
    {BackboneKind::desk_resnet, "desk_resnet"},
    {BackboneKind::desk_inception, "desk_inception"},
    {BackboneKind::desk_efficientnet, "desk_efficientnet"},
};

models::Backbone make_backbone(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::resnet50: return models::resnet50_backbone();
    case BackboneKind::inceptionv3: return models::inceptionv3_backbone();
    case BackboneKind::efficientnetb0: return models::efficientnetb0_backbone();
    case BackboneKind::desk_resnet: return models::desk_resnet_backbone();
    case BackboneKind::desk_inception: return models::desk_inception_backbone();
    case BackboneKind::desk_efficientnet: return models::desk_efficientnet_backbone();
  }
  throw UnsupportedKind("unknown backbone kind");
}

}  // namespace

std::string_view to_string(BackboneKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

BackboneKind parse_backbone_kind(std::string_view text) {
  for (const auto& k : kKinds)
    if (k.name == text) return k.kind;
  throw UnsupportedKind("unsupported model kind '" + std::string(text) + "'");
}

bool is_desk(BackboneKind kind) {
  return kind == BackboneKind::desk_resnet || kind == BackboneKind::desk_inception ||
         kind == BackboneKind::desk_efficientnet;
}

const std::vector<BackboneKind>& all_backbone_kinds() {
  static const std::vector<BackboneKind> kinds = [] {
    std::vector<BackboneKind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return kinds;
}

void ModelConfig::validate() const {
  if (input_height != kInputSize || input_width != kInputSize || input_channels != 3)
    throw ConfigError("models take 96x96x3 input");
  if (num_classes != 10) throw ConfigError("models have a ten-class head");
  if (weight_init.source == WeightInit::Source::pretrained && weight_init.archive.empty())
    throw ConfigError("pretrained initialisation needs an archive path");
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json init = {{"source", c.weight_init.source == WeightInit::Source::random ? "random" : "pretrained"},
                         {"seed", c.weight_init.seed}};
  if (c.weight_init.source == WeightInit::Source::pretrained) init["path"] = c.weight_init.archive.string();
  return {{"input_height", c.input_height},
          {"input_width", c.input_width},
          {"input_channels", c.input_channels},
          {"num_classes", c.num_classes},
          {"weight_init", init}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.input_height = j.value("input_height", c.input_height);
    c.input_width = j.value("input_width", c.input_width);
    c.input_channels = j.value("input_channels", c.input_channels);
    c.num_classes = j.value("num_classes", c.num_classes);
    if (j.contains("weight_init")) {
      const auto& w = j.at("weight_init");
      const auto source = w.value("source", std::string("random"));
      if (source == "pretrained") {
        c.weight_init.source = WeightInit::Source::pretrained;
        c.weight_init.archive = w.at("path").get<std::string>();
      } else if (source != "random") {
        throw ConfigError("weight_init.source must be 'random' or 'pretrained'");
      }
      c.weight_init.seed = w.value("seed", std::uint64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------- Model

Model::Model(BackboneKind kind, ModelConfig config, std::unique_ptr<nn::Sequential> net)
    : kind_(kind), config_(std::move(config)), net_(std::move(net)) {}

Tensor Model::forward_logits(const Tensor& input, nn::Phase phase) {
  if (input.rank() != 4 || input.dim(1) != config_.input_channels || input.dim(2) != config_.input_height ||
      input.dim(3) != config_.input_width)
    throw ShapeError("model expects [N,3,96,96] input, got " + shape_string(input.shape()));
  if (input.dim(0) == 0) throw ShapeError("empty batch");
  return net_->forward(input, phase);
}

Tensor Model::backward(const Tensor& dlogits) { return net_->backward(dlogits); }

std::vector<nn::ParamRef> Model::parameters() {
  std::vector<nn::ParamRef> out;
  net_->collect("", out);
  return out;
}

void Model::release() { net_->release(); }

void initialize_parameters(Model& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& p : model.parameters()) {
    switch (p.role) {
      case nn::ParamRole::kernel: {
        // He for convolutions (ReLU-family inputs), LeCun for the linear head.
        const double gain = p.value->rank() == 4 ? 2.0 : 1.0;
        const double std_dev = std::sqrt(gain / static_cast<double>(p.fan_in));
        std::normal_distribution<Scalar> dist(0.0, std_dev);
        for (auto& v : p.value->values()) v = dist(rng);
        break;
      }
      case nn::ParamRole::bias:
      case nn::ParamRole::norm_shift:
      case nn::ParamRole::running_mean: p.value->fill(0.0); break;
      case nn::ParamRole::norm_scale:
      case nn::ParamRole::running_var: p.value->fill(1.0); break;
    }
  }
}

Model build_model(BackboneKind kind, const ModelConfig& config) {
  config.validate();
  auto backbone = make_backbone(kind);
  auto net = std::move(backbone.net);
  net->add("pool", std::make_unique<nn::GlobalAvgPool>());
  net->add("flatten", std::make_unique<nn::Flatten>());
  net->add("fc", std::make_unique<nn::Dense>(backbone.features, config.num_classes));
  Model model(kind, config, std::move(net));
  initialize_parameters(model, config.weight_init.seed);
  if (config.weight_init.source == WeightInit::Source::pretrained) load_pretrained(model, config.weight_init.archive);
  return model;
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax expects a matrix");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar* row = logits.data() + i * k;
    Scalar* dst = out.data() + i * k;
    const Scalar peak = *std::max_element(row, row + k);
    Scalar sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += dst[c] = std::exp(row[c] - peak);
    for (std::size_t c = 0; c < k; ++c) dst[c] /= sum;
  }
  return out;
}

Tensor forward(Model& model, const TensorBatch& batch) {
  if (batch.height != model.config().input_height || batch.width != model.config().input_width ||
      batch.channels != model.config().input_channels)
    throw ShapeError("batch geometry does not match the model input");
  return softmax_rows(model.forward_logits(to_nchw(batch), nn::Phase::infer));
}

ParameterSummary parameter_count(Model& model) {
  ParameterSummary s;
  for (const auto& p : model.parameters()) {
    if (p.is_buffer()) continue;
    const std::size_t n = p.value->size();
    s.total += n;
    s.trainable += n;  // nothing is frozen: every layer fine-tunes
    const auto dot = p.name.rfind('.');
    s.per_layer[dot == std::string::npos ? p.name : p.name.substr(0, dot)] += n;
  }
  return s;
}

}  // namespace numta
