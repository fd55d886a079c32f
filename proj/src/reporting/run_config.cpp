#include "numta/reporting/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "numta/core/errors.hpp"
#include "numta/datasetio/manifest_json.hpp"
#include "numta/preprocess/image.hpp"
#include "numta/training/data_loader.hpp"

namespace numta {

std::size_t default_batch_size(BackboneKind kind) {
  return kind == BackboneKind::efficientnetb0 || kind == BackboneKind::desk_efficientnet ? 64 : 32;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig c;
  c.weight_init.seed = init_seed;
  if (pretrained) {
    c.weight_init.source = WeightInit::Source::pretrained;
    c.weight_init.archive = *pretrained;
  }
  return c;
}

void RunConfig::validate() const {
  if (name.empty()) throw ConfigError("run config needs a name");
  if (name.find('/') != std::string::npos || name == "." || name == "..")
    throw ConfigError("run name must be a plain directory name");
  if (dataset_root.empty()) throw ConfigError("no dataset_root in the config and NUMTA_ROOT is unset");
  if (sources.empty()) throw ConfigError("no source tags selected");
  for (char t : sources)
    if (t < 'a' || t > 'f') throw ConfigError(std::string("unknown source tag '") + t + "'");
  split.validate();
  preprocess.validate();
  if (augment) augment->validate();
  train.validate();
  model_config().validate();
}

nlohmann::json to_json(const AugmentSpec& s) {
  nlohmann::json j = {
      {"spatial",
       {{"rotation_deg", s.spatial.rotation_deg},
        {"translation_px", s.spatial.translation_px},
        {"shear_deg", s.spatial.shear_deg},
        {"height_shift", s.spatial.height_shift},
        {"width_shift", s.spatial.width_shift},
        {"zoom", s.spatial.zoom},
        {"channel_shift", s.spatial.channel_shift}}},
      {"photometric",
       {{"noise_sigma", s.photometric.noise_sigma},
        {"brightness", s.photometric.brightness},
        {"contrast", s.photometric.contrast},
        {"saturation", s.photometric.saturation},
        {"hue_deg", s.photometric.hue_deg}}},
      {"occlusion", {{"count", s.occlusion.count}, {"max_box_fraction", s.occlusion.max_box_fraction}}},
      {"superimpose", {{"alpha", s.superimpose.alpha}, {"mirror_donor", s.superimpose.mirror_donor}}}};
  return j;
}

AugmentSpec augment_spec_from_json(const nlohmann::json& j) {
  AugmentSpec s;
  try {
    if (auto it = j.find("spatial"); it != j.end()) {
      auto& a = s.spatial;
      a.rotation_deg = it->value("rotation_deg", a.rotation_deg);
      a.translation_px = it->value("translation_px", a.translation_px);
      a.shear_deg = it->value("shear_deg", a.shear_deg);
      a.height_shift = it->value("height_shift", a.height_shift);
      a.width_shift = it->value("width_shift", a.width_shift);
      a.zoom = it->value("zoom", a.zoom);
      a.channel_shift = it->value("channel_shift", a.channel_shift);
    }
    if (auto it = j.find("photometric"); it != j.end()) {
      auto& a = s.photometric;
      a.noise_sigma = it->value("noise_sigma", a.noise_sigma);
      a.brightness = it->value("brightness", a.brightness);
      a.contrast = it->value("contrast", a.contrast);
      a.saturation = it->value("saturation", a.saturation);
      a.hue_deg = it->value("hue_deg", a.hue_deg);
    }
    if (auto it = j.find("occlusion"); it != j.end()) {
      s.occlusion.count = it->value("count", s.occlusion.count);
      s.occlusion.max_box_fraction = it->value("max_box_fraction", s.occlusion.max_box_fraction);
    }
    if (auto it = j.find("superimpose"); it != j.end()) {
      s.superimpose.alpha = it->value("alpha", s.superimpose.alpha);
      s.superimpose.mirror_donor = it->value("mirror_donor", s.superimpose.mirror_donor);
      if (it->contains("donor")) {
        const auto path = it->at("donor").get<std::string>();
        auto donor = try_decode_image(path);
        if (!donor) throw ConfigError("cannot read superimpose donor " + path);
        s.superimpose.donor = to_model_input(*donor);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed augment spec: ") + e.what());
  }
  s.validate();
  return s;
}

RunConfig run_config_from_json(const nlohmann::json& j, const std::optional<std::string>& env_root) {
  RunConfig c;
  try {
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");
    c.name = j.at("name").get<std::string>();
    c.model = parse_backbone_kind(j.at("model").get<std::string>());
    if (j.contains("dataset_root"))
      c.dataset_root = j.at("dataset_root").get<std::string>();
    else if (env_root)
      c.dataset_root = *env_root;
    if (j.contains("sources")) {
      c.sources.clear();
      for (char t : j.at("sources").get<std::string>()) c.sources.insert(t);
    }
    c.subsample = j.value("subsample", c.subsample);
    if (j.contains("split")) c.split = split_spec_from_json(j.at("split"));
    if (j.contains("pretrained") && !j.at("pretrained").is_null())
      c.pretrained = std::filesystem::path(j.at("pretrained").get<std::string>());
    c.init_seed = j.value("init_seed", c.init_seed);
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      c.preprocess = PreprocessMode::defaults(parse_preprocess_kind(p.value("mode", std::string("caffe"))));
      if (p.contains("means")) c.preprocess.channel_means = p.at("means").get<std::array<double, 3>>();
      if (p.contains("stds")) c.preprocess.channel_stds = p.at("stds").get<std::array<double, 3>>();
    }
    if (j.contains("augment") && !j.at("augment").is_null()) {
      c.augment = augment_spec_from_json(j.at("augment"));
      c.augment_source = j.at("augment");
    }
    TrainConfig defaults;
    defaults.batch_size = default_batch_size(c.model);
    c.train = train_config_from_json(j.value("train", nlohmann::json::object()), defaults);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("csv")) {
      c.csv.filename = j.at("csv").value("filename_column", c.csv.filename);
      c.csv.label = j.at("csv").value("label_column", c.csv.label);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run config: ") + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  std::string tags(c.sources.begin(), c.sources.end());
  nlohmann::json j = {{"name", c.name},
                      {"dataset_root", c.dataset_root.string()},
                      {"sources", tags},
                      {"subsample", c.subsample},
                      {"split", to_json(c.split)},
                      {"model", std::string(to_string(c.model))},
                      {"init_seed", c.init_seed},
                      {"preprocess",
                       {{"mode", std::string(to_string(c.preprocess.kind))},
                        {"means", c.preprocess.channel_means},
                        {"stds", c.preprocess.channel_stds}}},
                      {"train", to_json(c.train)},
                      {"output_dir", c.output_dir.string()},
                      {"csv", {{"filename_column", c.csv.filename}, {"label_column", c.csv.label}}}};
  j["pretrained"] = c.pretrained ? nlohmann::json(c.pretrained->string()) : nlohmann::json(nullptr);
  if (!c.augment)
    j["augment"] = nullptr;
  else
    j["augment"] = c.augment_source.is_null() ? to_json(*c.augment) : c.augment_source;
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  std::optional<std::string> env;
  if (const char* root = std::getenv("NUMTA_ROOT"); root && *root) env = root;
  return run_config_from_json(j, env);
}

}  // namespace numta
