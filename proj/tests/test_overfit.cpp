// Slow: each run trains a desk model for 20 epochs on 256 samples.

#include <doctest.h>

#include <cstdio>

#include "numta/datasetio/dataset.hpp"
#include "numta/reporting/synthetic.hpp"
#include "numta/training/data_loader.hpp"
#include "numta/training/trainer.hpp"

using namespace numta;

namespace {

// 256 samples spread over ten classes by largest remainder: 26 x 6, 25 x 4.
ImageSet stratified_256(std::uint64_t seed) {
  const auto per_class = largest_remainder(256, std::vector<std::size_t>(10, 1000));
  ImageSet s;
  for (int d = 0; d < 10; ++d)
    for (std::size_t i = 0; i < per_class[std::size_t(d)]; ++i) {
      s.images.push_back(to_model_input(render_digit(d, seed + i * 10 + std::uint64_t(d))));
      s.labels.push_back(d);
    }
  return s;
}

void print(const char* tag, const EpochHistory& h) {
  std::printf("%s: loss %.4f -> %.4f, train acc %.4f -> %.4f\n", tag, h.train_loss.front(), h.train_loss.back(),
              h.train_accuracy.front(), h.train_accuracy.back());
}

}  // namespace

TEST_CASE("desk efficientnet memorises 256 samples from scratch") {
  const auto set = stratified_256(1'000'000);
  TrainConfig cfg;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 16;
  cfg.epochs = 20;
  cfg.seed = 1;
  auto r = train(build_model(BackboneKind::desk_efficientnet), set, set, cfg, PreprocessMode::tf());
  REQUIRE_FALSE(r.failed());
  print("scratch", r.history);
  CHECK(r.history.size() == 20);
  CHECK(r.history.train_accuracy.back() >= 0.95);
  CHECK(r.history.train_loss.back() < r.history.train_loss.front());
}

TEST_CASE("fine-tuning at lr 1e-4 from a pretrained backbone memorises 256 samples") {
  // Backbone trained on digits rendered with disjoint seeds, then fine-tuned
  // with the small learning rate used for full-size runs.
  const auto pre = stratified_256(2'000'000);
  TrainConfig pcfg;
  pcfg.learning_rate = 3e-3;
  pcfg.batch_size = 16;
  pcfg.epochs = 20;
  pcfg.seed = 2;
  auto donor = train(build_model(BackboneKind::desk_efficientnet), pre, pre, pcfg, PreprocessMode::tf());
  REQUIRE_FALSE(donor.failed());

  auto model = build_model(BackboneKind::desk_efficientnet);
  for (auto& [dst, src] : [&] {
         std::vector<std::pair<nn::ParamRef, nn::ParamRef>> pairs;
         auto a = model.parameters(), b = donor.model.parameters();
         for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
         return pairs;
       }())
    if (!Model::is_head(dst.name)) *dst.value = *src.value;

  const auto set = stratified_256(1'000'000);
  TrainConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 16;
  cfg.epochs = 20;
  cfg.seed = 1;
  auto r = train(std::move(model), set, set, cfg, PreprocessMode::tf());
  REQUIRE_FALSE(r.failed());
  print("fine-tune", r.history);
  CHECK(r.history.train_accuracy.back() >= 0.95);
  CHECK(r.history.train_loss.back() < r.history.train_loss.front());
}
