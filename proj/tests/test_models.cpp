#include <doctest.h>

#include <cstring>
#include <fstream>
#include <numeric>

#include "numta/core/errors.hpp"
#include "numta/models/archive.hpp"
#include "numta/models/model.hpp"
#include "support.hpp"

using namespace numta;
using numta::test::random_image;
using numta::test::random_tensor;
using numta::test::TempDir;

namespace {

// Parameter counts from first principles: conv kernels carry no bias, batch
// norm contributes scale and shift, the head is features*10 + 10.
std::size_t conv(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, std::size_t groups = 1) {
  return in / groups * out * kh * kw;
}
std::size_t bn(std::size_t c) { return 2 * c; }
std::size_t cbn(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, std::size_t groups = 1) {
  return conv(in, out, kh, kw, groups) + bn(out);
}
std::size_t head(std::size_t features) { return features * 10 + 10; }

std::size_t resnet_count(std::size_t stem, std::size_t stem_k, const std::vector<std::array<std::size_t, 2>>& stages) {
  std::size_t n = cbn(3, stem, stem_k, stem_k), in = stem;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const auto [w, blocks] = stages[s];
    for (std::size_t b = 0; b < blocks; ++b) {
      n += cbn(in, w, 1, 1) + cbn(w, w, 3, 3) + cbn(w, 4 * w, 1, 1);
      if (b == 0 && (in != 4 * w || s > 0)) n += cbn(in, 4 * w, 1, 1);
      in = 4 * w;
    }
  }
  return n + head(in);
}

std::size_t inc_a(std::size_t in, std::size_t b1, std::size_t b5a, std::size_t b5b, std::size_t d1, std::size_t d2,
                  std::size_t pool) {
  return cbn(in, b1, 1, 1) + cbn(in, b5a, 1, 1) + cbn(b5a, b5b, 5, 5) + cbn(in, d1, 1, 1) + cbn(d1, d2, 3, 3) +
         cbn(d2, d2, 3, 3) + cbn(in, pool, 1, 1);
}
std::size_t inc_b(std::size_t in, std::size_t b3, std::size_t d1, std::size_t d2) {
  return cbn(in, b3, 3, 3) + cbn(in, d1, 1, 1) + cbn(d1, d2, 3, 3) + cbn(d2, d2, 3, 3);
}
std::size_t inc_c(std::size_t c7) {
  const std::size_t in = 768;
  return cbn(in, 192, 1, 1) + cbn(in, c7, 1, 1) + cbn(c7, c7, 1, 7) + cbn(c7, 192, 7, 1) + cbn(in, c7, 1, 1) +
         3 * cbn(c7, c7, 7, 1) + cbn(c7, 192, 1, 7) + cbn(in, 192, 1, 1);
}
std::size_t inc_d() {
  return cbn(768, 192, 1, 1) + cbn(192, 320, 3, 3) + cbn(768, 192, 1, 1) + cbn(192, 192, 1, 7) +
         cbn(192, 192, 7, 1) + cbn(192, 192, 3, 3);
}
std::size_t inc_e(std::size_t in) {
  return cbn(in, 320, 1, 1) + cbn(in, 384, 1, 1) + 2 * cbn(384, 384, 3, 1) + cbn(in, 448, 1, 1) +
         cbn(448, 384, 3, 3) + 2 * cbn(384, 384, 3, 1) + cbn(in, 192, 1, 1);
}

std::size_t inception_v3_count() {
  std::size_t n = cbn(3, 32, 3, 3) + cbn(32, 32, 3, 3) + cbn(32, 64, 3, 3) + cbn(64, 80, 1, 1) + cbn(80, 192, 3, 3);
  n += inc_a(192, 64, 48, 64, 64, 96, 32) + inc_a(256, 64, 48, 64, 64, 96, 64) + inc_a(288, 64, 48, 64, 64, 96, 64);
  n += inc_b(288, 384, 64, 96);
  n += inc_c(128) + inc_c(160) + inc_c(160) + inc_c(192);
  n += inc_d() + inc_e(1280) + inc_e(2048);
  return n + head(2048);
}

std::size_t mbconv(std::size_t in, std::size_t out, std::size_t e, std::size_t k) {
  const std::size_t h = in * e, sq = std::max<std::size_t>(1, in / 4);
  std::size_t n = e != 1 ? cbn(in, h, 1, 1) : 0;
  n += cbn(h, h, k, k, h);
  n += h * sq + sq + sq * h + h;  // squeeze-excitation 1x1 convs with bias
  return n + cbn(h, out, 1, 1);
}

std::size_t efficientnet_count(std::size_t stem, const std::vector<std::array<std::size_t, 4>>& stages,
                               std::size_t head_ch) {
  std::size_t n = cbn(3, stem, 3, 3), in = stem;
  for (const auto& [e, k, out, reps] : stages)
    for (std::size_t r = 0; r < reps; ++r) {
      n += mbconv(in, out, e, k);
      in = out;
    }
  return n + cbn(in, head_ch, 1, 1) + head(head_ch);
}

TensorBatch random_batch(std::size_t n, std::uint64_t seed) {
  std::vector<ImageBuffer> imgs;
  for (std::size_t i = 0; i < n; ++i) imgs.push_back(random_image(96, 96, 3, seed + i));
  return preprocess_batch(imgs, PreprocessMode::tf());
}

bool has_key_containing(const ParameterSummary& s, std::string_view needle) {
  for (const auto& [k, v] : s.per_layer)
    if (k.find(needle) != std::string::npos) return true;
  return false;
}

std::vector<Tensor> snapshot(Model& m) {
  std::vector<Tensor> out;
  for (auto& p : m.parameters()) out.push_back(*p.value);
  return out;
}

}  // namespace

TEST_CASE("kind names round-trip") {
  for (auto k : all_backbone_kinds()) CHECK(parse_backbone_kind(to_string(k)) == k);
  CHECK(all_backbone_kinds().size() == 6);
  CHECK_THROWS_AS(parse_backbone_kind("vgg16"), UnsupportedKind);
  CHECK(is_desk(BackboneKind::desk_inception));
  CHECK_FALSE(is_desk(BackboneKind::resnet50));
}

TEST_CASE("model config validation") {
  ModelConfig c;
  CHECK_NOTHROW(c.validate());
  c.input_height = 224;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.num_classes = 1000;
  CHECK_THROWS_AS(build_model(BackboneKind::desk_resnet, c), ConfigError);
  c = {};
  c.weight_init.source = WeightInit::Source::pretrained;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  ModelConfig d;
  d.weight_init.seed = 77;
  auto back = model_config_from_json(to_json(d));
  CHECK(back.weight_init.seed == 77);
  CHECK(back.num_classes == 10);
}

TEST_CASE("parameter counts match layer-by-layer formulas") {
  struct Case {
    BackboneKind kind;
    std::size_t expected;
  };
  const std::vector<Case> cases{
      {BackboneKind::resnet50, resnet_count(64, 7, {{64, 3}, {128, 4}, {256, 6}, {512, 3}})},
      {BackboneKind::desk_resnet, resnet_count(16, 3, {{8, 1}, {16, 1}})},
      {BackboneKind::inceptionv3, inception_v3_count()},
      {BackboneKind::desk_inception,
       cbn(3, 16, 3, 3) + inc_a(16, 8, 6, 8, 8, 12, 8) + inc_b(36, 16, 8, 12) + head(16 + 12 + 36)},
      {BackboneKind::efficientnetb0,
       efficientnet_count(32,
                          {{1, 3, 16, 1}, {6, 3, 24, 2}, {6, 5, 40, 2}, {6, 3, 80, 3}, {6, 5, 112, 3},
                           {6, 5, 192, 4}, {6, 3, 320, 1}},
                          1280)},
      {BackboneKind::desk_efficientnet, efficientnet_count(16, {{1, 3, 8, 1}, {4, 3, 16, 1}, {4, 5, 24, 1}, {4, 3, 24, 1}}, 64)},
  };
  for (const auto& c : cases) {
    CAPTURE(to_string(c.kind));
    auto m = build_model(c.kind);
    auto s = parameter_count(m);
    CHECK(s.total == c.expected);
    CHECK(s.trainable == s.total);
    std::size_t sum = 0;
    for (const auto& [k, v] : s.per_layer) sum += v;
    CHECK(sum == s.total);
  }
}

TEST_CASE("full backbones agree with the published reference totals") {
  // Reference totals with a 1000-way head, minus that head, plus the 10-way one.
  // Inception also drops its auxiliary classifier (3,326,696 parameters).
  CHECK(parameter_count(*std::make_unique<Model>(build_model(BackboneKind::resnet50))).total ==
        25'557'032 - 2'049'000 + 20'490);
  CHECK(parameter_count(*std::make_unique<Model>(build_model(BackboneKind::inceptionv3))).total ==
        27'161'264 - 3'326'696 - 2'049'000 + 20'490);
  auto eff = build_model(BackboneKind::efficientnetb0);
  auto s = parameter_count(eff);
  CHECK(s.total == 5'288'548 - 1'281'000 + 12'810);
  // Far below the 11M sometimes quoted for this backbone.
  CHECK(s.total < 5'000'000);
  CHECK(s.per_layer.at("fc") == 12'810);
}

TEST_CASE("desk variants are smaller and keep their parent's block types") {
  const std::vector<std::pair<BackboneKind, BackboneKind>> pairs{
      {BackboneKind::resnet50, BackboneKind::desk_resnet},
      {BackboneKind::inceptionv3, BackboneKind::desk_inception},
      {BackboneKind::efficientnetb0, BackboneKind::desk_efficientnet}};
  for (auto [full, desk] : pairs) {
    auto a = build_model(full);
    auto b = build_model(desk);
    CHECK(parameter_count(b).total < parameter_count(a).total);
  }
  auto r = build_model(BackboneKind::desk_resnet);
  auto rs = parameter_count(r);
  CHECK(has_key_containing(rs, "downsample"));
  CHECK(has_key_containing(rs, "conv3"));  // bottleneck 1x1 -> 3x3 -> 1x1

  auto i = build_model(BackboneKind::desk_inception);
  auto is = parameter_count(i);
  CHECK(has_key_containing(is, "Mixed_5b.branch5x5_2"));
  CHECK(has_key_containing(is, "Mixed_5b.branch_pool"));
  CHECK(has_key_containing(is, "Mixed_6a.branch3x3dbl_3"));

  auto e = build_model(BackboneKind::desk_efficientnet);
  auto es = parameter_count(e);
  CHECK(has_key_containing(es, ".se.reduce"));
  CHECK(has_key_containing(es, ".se.expand"));
  CHECK(has_key_containing(es, ".depthwise.conv"));
}

TEST_CASE("desk forward: shape and row normalisation") {
  auto batch = random_batch(2, 100);
  for (auto k : {BackboneKind::desk_resnet, BackboneKind::desk_inception, BackboneKind::desk_efficientnet}) {
    CAPTURE(to_string(k));
    auto m = build_model(k);
    auto p = forward(m, batch);
    REQUIRE(p.shape() == Shape{2, 10});
    for (std::size_t r = 0; r < 2; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 10; ++c) {
        CHECK(p[r * 10 + c] >= 0.0);
        sum += p[r * 10 + c];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("forward rejects malformed input") {
  auto m = build_model(BackboneKind::desk_resnet);
  CHECK_THROWS_AS(m.forward_logits(Tensor({1, 3, 64, 64}), nn::Phase::infer), ShapeError);
  CHECK_THROWS_AS(m.forward_logits(Tensor({0, 3, 96, 96}), nn::Phase::infer), ShapeError);
  CHECK_THROWS_AS(m.forward_logits(Tensor({1, 96, 96, 3}), nn::Phase::infer), ShapeError);
  CHECK_THROWS_AS(softmax_rows(Tensor({10})), ShapeError);
}

TEST_CASE("softmax_rows is stable for large logits") {
  Tensor l({2, 3}, std::vector<Scalar>{1000, 1000, 1000, -5, 0, 5});
  auto p = softmax_rows(l);
  CHECK(p[0] == doctest::Approx(1.0 / 3));
  double e0 = std::exp(-10.0), e1 = std::exp(-5.0);
  CHECK(p[5] == doctest::Approx(1.0 / (1 + e0 + e1)).epsilon(1e-12));
}

TEST_CASE("fresh desk models predict near uniform on average") {
  auto batch = random_batch(512, 5000);
  for (auto k : {BackboneKind::desk_resnet, BackboneKind::desk_inception, BackboneKind::desk_efficientnet}) {
    CAPTURE(to_string(k));
    auto m = build_model(k);
    auto p = forward(m, batch);
    double total = 0.0;
    for (std::size_t c = 0; c < 10; ++c) {
      double mean = 0.0;
      for (std::size_t r = 0; r < 512; ++r) mean += p[r * 10 + c];
      mean /= 512.0;
      total += mean;
      CHECK(mean > 0.05);
      CHECK(mean < 0.15);
    }
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("initialisation is seeded and fan-in scaled") {
  ModelConfig a, b;
  a.weight_init.seed = 1;
  b.weight_init.seed = 1;
  auto m1 = build_model(BackboneKind::desk_efficientnet, a);
  auto m2 = build_model(BackboneKind::desk_efficientnet, b);
  CHECK(snapshot(m1) == snapshot(m2));
  initialize_parameters(m2, 2);
  CHECK_FALSE(snapshot(m1) == snapshot(m2));

  auto big = build_model(BackboneKind::resnet50);
  for (auto& p : big.parameters()) {
    if (p.name != "layer3.0.conv2.weight") continue;
    // 256 * 3 * 3 fan-in, He normal: variance 2 / 2304
    double sq = 0.0;
    for (auto v : p.value->values()) sq += v * v;
    double var = sq / double(p.value->size());
    CHECK(var == doctest::Approx(2.0 / 2304.0).epsilon(0.05));
  }
}

TEST_CASE("checkpoint round trip restores every tensor bit-exactly") {
  TempDir dir;
  ModelConfig cfg;
  cfg.weight_init.seed = 9;
  auto m = build_model(BackboneKind::desk_inception, cfg);
  // make the running statistics non-trivial
  m.forward_logits(to_nchw(random_batch(4, 1)), nn::Phase::train);
  save_checkpoint(m, dir / "m.ntc");
  CHECK_FALSE(std::filesystem::exists(dir / "m.ntc.tmp"));
  auto back = load_checkpoint(BackboneKind::desk_inception, dir / "m.ntc");
  CHECK(snapshot(back) == snapshot(m));
  CHECK(back.config().weight_init.seed == 9);
  auto batch = random_batch(3, 50);
  auto p1 = forward(m, batch), p2 = forward(back, batch);
  CHECK(p1 == p2);

  CHECK_THROWS_AS(load_checkpoint(BackboneKind::desk_resnet, dir / "m.ntc"), IncompatibleArchive);
}

TEST_CASE("archive rejects bad files") {
  TempDir dir;
  CHECK_THROWS_AS(read_archive(dir / "missing.ntc"), ArchiveError);
  {
    std::ofstream os(dir / "junk.ntc", std::ios::binary);
    os << "not an archive at all";
  }
  CHECK_THROWS_AS(read_archive(dir / "junk.ntc"), ArchiveError);

  Archive a;
  a.tensors.push_back({"x", random_tensor({3, 4}, 1)});
  write_archive(dir / "ok.ntc", a);
  auto size = std::filesystem::file_size(dir / "ok.ntc");
  std::filesystem::resize_file(dir / "ok.ntc", size - 8);
  CHECK_THROWS_AS(read_archive(dir / "ok.ntc"), ArchiveError);
}

TEST_CASE("archive reads single-precision tensors") {
  TempDir dir;
  const std::vector<float> vals{1.5f, -2.25f, 3.0f, 0.125f};
  std::string header = R"({"format_version":1,"tensors":[{"name":"w","dtype":"f32","shape":[2,2],"offset":0}]})";
  {
    std::ofstream os(dir / "f32.ntc", std::ios::binary);
    os.write("NUMTANTC", 8);
    std::uint32_t version = 1;
    std::uint64_t len = header.size();
    os.write(reinterpret_cast<const char*>(&version), 4);
    os.write(reinterpret_cast<const char*>(&len), 8);
    os.write(header.data(), std::streamsize(header.size()));
    os.write(reinterpret_cast<const char*>(vals.data()), std::streamsize(vals.size() * 4));
  }
  auto a = read_archive(dir / "f32.ntc");
  REQUIRE(a.tensors.size() == 1);
  CHECK(a.tensors[0].name == "w");
  CHECK(a.tensors[0].tensor.shape() == Shape{2, 2});
  for (std::size_t i = 0; i < 4; ++i) CHECK(a.tensors[0].tensor[i] == double(vals[i]));
}

TEST_CASE("pretrained load copies matching backbone tensors only") {
  TempDir dir;
  ModelConfig src_cfg;
  src_cfg.weight_init.seed = 123;
  auto donor = build_model(BackboneKind::desk_efficientnet, src_cfg);

  Archive a;
  std::string reshaped;
  std::string dropped;
  std::size_t backbone = 0;
  for (auto& p : donor.parameters()) {
    if (Model::is_head(p.name)) {
      a.tensors.push_back({p.name, *p.value});
      continue;
    }
    ++backbone;
    if (reshaped.empty() && p.value->rank() == 4) {
      reshaped = p.name;
      a.tensors.push_back({p.name, Tensor({p.value->size()}, std::vector<Scalar>(p.value->size(), 0.5))});
      continue;
    }
    if (dropped.empty() && p.name.find("running_var") != std::string::npos) {
      dropped = p.name;
      continue;
    }
    a.tensors.push_back({p.name, *p.value});
  }
  write_archive(dir / "pre.ntc", a);

  ModelConfig cfg;
  cfg.weight_init.seed = 7;
  auto m = build_model(BackboneKind::desk_efficientnet, cfg);
  std::map<std::string, Tensor> before;
  for (auto& p : m.parameters()) before[p.name] = *p.value;

  auto report = load_pretrained(m, dir / "pre.ntc");
  CHECK(report.matched.size() == backbone - 2);
  REQUIRE(report.shape_mismatched.size() == 1);
  CHECK(report.shape_mismatched[0] == reshaped);
  REQUIRE(report.missing.size() == 1);
  CHECK(report.missing[0] == dropped);
  CHECK(report.skipped_head.size() == 2);

  std::map<std::string, Tensor> want;
  for (auto& p : donor.parameters()) want[p.name] = *p.value;
  for (auto& p : m.parameters()) {
    CAPTURE(p.name);
    if (Model::is_head(p.name) || p.name == reshaped || p.name == dropped)
      CHECK(*p.value == before[p.name]);
    else
      CHECK(*p.value == want[p.name]);
  }

  // through the config path as well
  ModelConfig pc;
  pc.weight_init.source = WeightInit::Source::pretrained;
  pc.weight_init.archive = dir / "pre.ntc";
  auto viacfg = build_model(BackboneKind::desk_efficientnet, pc);
  for (auto& p : viacfg.parameters())
    if (!Model::is_head(p.name) && p.name != reshaped && p.name != dropped) CHECK(*p.value == want[p.name]);
}

TEST_CASE("pretrained load with nothing in common is rejected") {
  TempDir dir;
  write_archive(dir / "empty.ntc", Archive{});
  auto m = build_model(BackboneKind::desk_resnet);
  CHECK_THROWS_AS(load_pretrained(m, dir / "empty.ntc"), IncompatibleArchive);

  auto other = build_model(BackboneKind::desk_inception);
  save_checkpoint(other, dir / "inc.ntc");
  CHECK_THROWS_AS(load_pretrained(m, dir / "inc.ntc"), IncompatibleArchive);
}
