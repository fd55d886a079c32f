#include <doctest.h>

#include <fstream>
#include <random>

#include "numta/core/errors.hpp"
#include "numta/reporting/compare.hpp"
#include "numta/reporting/history.hpp"
#include "numta/reporting/plots.hpp"
#include "numta/reporting/run_config.hpp"
#include "numta/reporting/synthetic.hpp"
#include "support.hpp"

using namespace numta;
using numta::test::TempDir;

namespace {

// Test accuracy climbing linearly from `first` to `last` over `epochs`.
EpochHistory curve(double first, double last, std::size_t epochs = 20) {
  EpochHistory h;
  for (std::size_t e = 0; e < epochs; ++e) {
    const double t = epochs == 1 ? 1.0 : double(e) / double(epochs - 1);
    const double acc = e + 1 == epochs ? last : first + t * (last - first);
    h.train_loss.push_back(2.0 - 1.5 * t);
    h.train_accuracy.push_back(0.5 + 0.4 * t);
    h.test_loss.push_back(1.8 - 1.2 * t);
    h.test_accuracy.push_back(acc);
  }
  return h;
}

ClassificationReport report_with(double accuracy, double macro_f1, double weighted_f1) {
  ClassificationReport r;
  for (int c = 0; c < 10; ++c) r.per_class.push_back({c, accuracy, accuracy, accuracy, 10});
  r.accuracy = accuracy;
  r.macro_avg = {accuracy, accuracy, macro_f1};
  r.weighted_avg = {accuracy, accuracy, weighted_f1};
  r.total_support = 100;
  return r;
}

EpochHistory random_history(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  EpochHistory h;
  for (std::size_t i = 0; i < n; ++i) {
    h.train_loss.push_back(3 * u(rng));
    h.train_accuracy.push_back(u(rng));
    h.test_loss.push_back(3 * u(rng));
    h.test_accuracy.push_back(u(rng));
  }
  return h;
}

}  // namespace

TEST_CASE("epoch delta replays the published differences") {
  struct Row {
    const char* name;
    double first, last;
    const char* diff;
  };
  for (const auto& r : {Row{"inception", 0.75, 0.90, "0.15"}, Row{"efficientnet", 0.91, 0.96, "0.05"},
                        Row{"resnet", 0.88, 0.94, "0.06"}}) {
    auto d = epoch_delta(curve(r.first, r.last), r.name);
    CHECK(d.name == r.name);
    CHECK(d.accuracy_at_1 == r.first);
    CHECK(d.accuracy_at_last == r.last);
    CHECK(d.difference == r.last - r.first);
    CHECK(format_half_up(d.difference) == r.diff);
    CHECK(std::abs(d.difference - std::stod(r.diff)) < 1e-12);
  }
}

TEST_CASE("epoch delta: constant, single epoch, random series, empty") {
  EpochHistory flat;
  for (int i = 0; i < 5; ++i) {
    flat.train_loss.push_back(1);
    flat.train_accuracy.push_back(0.5);
    flat.test_loss.push_back(1);
    flat.test_accuracy.push_back(0.5);
  }
  CHECK(epoch_delta(flat, "f") == EpochDelta{"f", 0.5, 0.5, 0.0});
  auto one = epoch_delta(curve(0.3, 0.3, 1), "one");
  CHECK(one.difference == 0.0);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    auto h = random_history(rng, 1 + i % 25);
    auto d = epoch_delta(h, "r");
    CHECK(d.difference == h.test_accuracy.back() - h.test_accuracy.front());
  }
  CHECK_THROWS_AS(epoch_delta(EpochHistory{}, "empty"), EmptyHistory);
}

TEST_CASE("compare orders by accuracy and marks the best run") {
  std::vector<RunResult> runs{{"inceptionv3", report_with(0.89, 0.88, 0.89), curve(0.75, 0.90)},
                              {"efficientnetb0", report_with(0.96, 0.96, 0.96), curve(0.91, 0.96)},
                              {"resnet50", report_with(0.94, 0.94, 0.94), curve(0.88, 0.94)}};
  auto t = compare(runs);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].name == "efficientnetb0");
  CHECK(t.rows[0].best);
  CHECK_FALSE(t.rows[1].best);
  CHECK_FALSE(t.rows[2].best);
  CHECK(t.rows[1].name == "resnet50");
  CHECK(t.rows[2].name == "inceptionv3");
  // values are copied, not recomputed
  CHECK(t.rows[2].macro_f1 == 0.88);
  CHECK(t.rows[2].weighted_f1 == 0.89);
  CHECK(t.rows[0].final_test_accuracy == 0.96);
  CHECK(t.rows[0].final_test_loss == runs[1].history.test_loss.back());
  REQUIRE(t.deltas.size() == 3);
  CHECK(t.deltas[0].name == "efficientnetb0");
  CHECK(t.deltas[2].difference == 0.90 - 0.75);

  CHECK(comparison_from_json(to_json(t)) == t);
  CHECK(comparison_from_json(nlohmann::json::parse(to_json(t).dump())) == t);
}

TEST_CASE("compare: single run, ties, errors") {
  auto single = compare({{"only", report_with(0.5, 0.5, 0.5), curve(0.2, 0.5)}});
  CHECK(single.rows.size() == 1);
  CHECK(single.rows[0].best);

  auto tie = compare({{"zeta", report_with(0.9, 0.9, 0.9), curve(0.5, 0.9)},
                      {"alpha", report_with(0.9, 0.8, 0.8), curve(0.5, 0.9)}});
  CHECK(tie.rows[0].name == "alpha");
  CHECK(tie.rows[0].best);
  CHECK_FALSE(tie.rows[1].best);

  CHECK_THROWS_AS(compare({}), EmptyRuns);
  CHECK_THROWS_AS(compare({{"x", report_with(0.5, 0.5, 0.5), EpochHistory{}}}), EmptyHistory);
}

TEST_CASE("history CSV round trip is exact") {
  TempDir dir;
  std::mt19937_64 rng(8);
  auto h = random_history(rng, 20);
  write_history_csv(dir / "h.csv", h);
  CHECK(read_history_csv(dir / "h.csv") == h);

  std::ifstream is(dir / "h.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "epoch,train_loss,train_acc,test_loss,test_acc");
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 20);

  {
    std::ofstream bad(dir / "bad.csv");
    bad << "epoch,train_loss,train_acc,test_loss,test_acc\n1,0.5,0.5,x,0.5\n";
  }
  CHECK_THROWS_AS(read_history_csv(dir / "bad.csv"), DataError);
  CHECK_THROWS_AS(read_history_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("plots: twenty epochs") {
  TempDir dir;
  auto h = curve(0.4, 0.95);
  auto files = render_plots(h, dir.path());
  for (const auto& p : {files.loss.path, files.accuracy.path, files.csv}) CHECK(std::filesystem::exists(p));
  CHECK(files.loss.path.filename() == "loss.png");
  CHECK(files.accuracy.path.filename() == "accuracy.png");
  CHECK(files.loss.series.size() == 2);
  CHECK(files.accuracy.series.size() == 2);
  CHECK(files.loss.x_min == 1.0);
  CHECK(files.loss.x_max == 20.0);
  CHECK(files.accuracy.y_min == 0.0);
  CHECK(files.accuracy.y_max == 1.0);
  CHECK(files.loss.y_min == 0.0);
  CHECK(files.loss.y_max >= 2.0);
  CHECK(read_history_csv(files.csv) == h);
  auto img = try_decode_image(files.loss.path);
  REQUIRE(img);
  CHECK(img->width > img->height);
}

TEST_CASE("plots: a single epoch draws without trouble") {
  TempDir dir;
  auto files = render_plots(curve(0.5, 0.5, 1), dir.path());
  CHECK(files.loss.x_min == 1.0);
  CHECK(files.loss.x_max == 1.0);
  CHECK(std::filesystem::exists(files.accuracy.path));
  CHECK(read_history_csv(files.csv).size() == 1);
  CHECK_THROWS_AS(render_plots(EpochHistory{}, dir.path()), EmptyHistory);
}

TEST_CASE("comparison charts") {
  TempDir dir;
  std::vector<RunResult> runs{{"a", report_with(0.9, 0.88, 0.9), curve(0.7, 0.9)},
                              {"b", report_with(0.95, 0.95, 0.95), curve(0.8, 0.95, 12)}};
  auto t = compare(runs);
  auto bars = render_comparison_chart(t, dir / "comparison.png");
  CHECK(std::filesystem::exists(dir / "comparison.png"));
  CHECK(bars.series == std::vector<std::string>{"accuracy", "macro avg f1", "weighted avg f1"});

  auto [loss, acc] = render_curve_comparison({{"a", runs[0].history}, {"b", runs[1].history}}, dir.path());
  CHECK(std::filesystem::exists(loss.path));
  CHECK(std::filesystem::exists(acc.path));
  CHECK(loss.series.size() == 2);
  CHECK(acc.x_max == 20.0);
}

TEST_CASE("run config: defaults and overrides") {
  auto c = run_config_from_json(nlohmann::json::parse(R"({"name": "e", "model": "efficientnetb0"})"), "/data/numta");
  CHECK(c.dataset_root == "/data/numta");
  CHECK(c.train.batch_size == 64);
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.epochs == 20);
  CHECK(c.preprocess.kind == PreprocessKind::caffe);
  CHECK(c.sources.size() == 6);
  CHECK(c.run_dir() == std::filesystem::path("runs") / "e");
  CHECK_NOTHROW(c.validate());

  auto r = run_config_from_json(nlohmann::json::parse(R"({"name": "r", "model": "resnet50",
      "dataset_root": "/elsewhere", "sources": "ab", "subsample": 17022,
      "preprocess": {"mode": "torch"}, "train": {"batch_size": 8, "learning_rate": 0.001}})"),
                                "/data/numta");
  CHECK(r.dataset_root == "/elsewhere");
  CHECK(r.sources == std::set<char>{'a', 'b'});
  CHECK(r.subsample == 17022);
  CHECK(r.preprocess.kind == PreprocessKind::torch);
  CHECK(r.train.batch_size == 8);
  CHECK(r.train.learning_rate == 0.001);
  CHECK(default_batch_size(BackboneKind::inceptionv3) == 32);
  CHECK(default_batch_size(BackboneKind::efficientnetb0) == 64);

  auto back = run_config_from_json(to_json(r), std::nullopt);
  CHECK(to_json(back) == to_json(r));
}

TEST_CASE("run config: errors") {
  auto parse = [](const char* text, std::optional<std::string> env = "/d") {
    return run_config_from_json(nlohmann::json::parse(text), env);
  };
  CHECK_THROWS_AS(parse(R"({"model": "resnet50"})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "vgg"})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "resnet50", "preprocess": {"mode": "keras"}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "resnet50", "train": {"epochs": "many"}})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "resnet50"})", std::nullopt).validate(), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "resnet50", "sources": "xyz"})").validate(), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "../up", "model": "resnet50"})").validate(), ConfigError);
  CHECK_THROWS_AS(parse(R"({"name": "x", "model": "resnet50", "train": {"learning_rate": -1}})").validate(),
                  ConfigError);

  TempDir dir;
  {
    std::ofstream os(dir / "broken.json");
    os << "{ not json";
  }
  CHECK_THROWS_AS(load_run_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("run config: NUMTA_ROOT supplies the dataset root") {
  TempDir dir;
  {
    std::ofstream os(dir / "c.json");
    os << R"({"name": "n", "model": "desk_resnet"})";
  }
  ::setenv("NUMTA_ROOT", "/from/env", 1);
  CHECK(load_run_config(dir / "c.json").dataset_root == "/from/env");
  ::unsetenv("NUMTA_ROOT");
  CHECK(load_run_config(dir / "c.json").dataset_root.empty());
}

TEST_CASE("run config: augmentation block") {
  auto c = run_config_from_json(nlohmann::json::parse(R"({"name": "a", "model": "desk_resnet",
      "augment": {"spatial": {"rotation_deg": 12, "zoom": 0.1}, "occlusion": {"count": 2, "max_box_fraction": 0.25}}})"),
                                "/d");
  REQUIRE(c.augment);
  CHECK(c.augment->spatial.rotation_deg == 12);
  CHECK(c.augment->spatial.zoom == 0.1);
  CHECK(c.augment->occlusion.count == 2);
  CHECK(c.augment->photometric.noise_sigma == 0.0);
  auto again = augment_spec_from_json(to_json(*c.augment));
  CHECK(again.spatial.rotation_deg == 12);
  CHECK(again.occlusion.max_box_fraction == 0.25);
}

TEST_CASE("synthetic digits") {
  auto a = render_digit(3, 7), b = render_digit(3, 7), c = render_digit(3, 8);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.channels == 3);
  CHECK(a.height == 48);

  TempDir dir;
  SyntheticSpec spec;
  spec.sources = {'a', 'c'};
  spec.per_class = 2;
  auto m = write_synthetic_dataset(dir.path(), spec);
  CHECK(m.size() == 40);
  CHECK(std::filesystem::exists(dir / "training-a.csv"));
  CHECK(std::filesystem::exists(dir / "training-c.csv"));
}
