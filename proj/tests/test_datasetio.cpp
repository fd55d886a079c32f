#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "numta/core/errors.hpp"
#include "numta/datasetio/csv.hpp"
#include "numta/datasetio/dataset.hpp"
#include "numta/datasetio/manifest_json.hpp"
#include "support.hpp"

using namespace numta;
using numta::test::TempDir;

namespace {

// Records with synthetic ids; paths are never opened.
DatasetManifest make_manifest(const std::vector<std::size_t>& per_class, char tag = 'a') {
  std::vector<SampleRecord> recs;
  std::size_t id = 0;
  // interleave classes so manifest order differs from class order
  std::vector<std::size_t> left = per_class;
  bool any = true;
  while (any) {
    any = false;
    for (std::size_t c = 0; c < left.size(); ++c) {
      if (left[c] == 0) continue;
      --left[c];
      any = true;
      const std::string name = std::string(1, tag) + std::to_string(id++);
      recs.push_back({name, "/nowhere/" + name + ".png", static_cast<int>(c), tag});
    }
  }
  return DatasetManifest(std::move(recs));
}

void write_source(const std::filesystem::path& root, char tag, const std::string& csv_body) {
  std::filesystem::create_directories(root / (std::string("training-") + tag));
  std::ofstream(root / (std::string("training-") + tag + ".csv")) << csv_body;
}

void write_png(const std::filesystem::path& root, char tag, const std::string& name, std::size_t channels = 3) {
  write_image(root / (std::string("training-") + tag) / name, numta::test::random_image(40, 40, channels, name.size()));
}

std::map<int, std::size_t> counts_of(const DatasetManifest& m) { return m.class_counts(); }

}  // namespace

TEST_CASE("csv reader handles quoting, CRLF and empty cells") {
  std::istringstream in("a,\"b,c\",\"say \"\"hi\"\"\"\r\n,,\nlast");
  std::vector<std::string> row;
  REQUIRE(csv::read_row(in, row));
  CHECK(row == std::vector<std::string>{"a", "b,c", "say \"hi\""});
  REQUIRE(csv::read_row(in, row));
  CHECK(row == std::vector<std::string>{"", "", ""});
  REQUIRE(csv::read_row(in, row));
  CHECK(row == std::vector<std::string>{"last"});
  CHECK_FALSE(csv::read_row(in, row));
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
}

TEST_CASE("manifest counts and duplicate ids") {
  const auto m = make_manifest({3, 2});
  CHECK(m.size() == 5);
  CHECK(m.class_counts().at(0) == 3);
  CHECK(m.class_counts().at(1) == 2);
  CHECK(m.provenance().at('a') == 5);
  std::vector<SampleRecord> dup{{"x", "p", 1, 'a'}, {"x", "q", 2, 'b'}};
  CHECK_THROWS_AS([&] { DatasetManifest bad(dup); }(), DataError);
}

TEST_CASE("scan_sources reads rows in CSV order, tags alphabetically") {
  TempDir dir;
  write_source(dir.path(), 'a', "filename,digit\na0.png,1\na1.png,2\na2.png,3\n");
  write_source(dir.path(), 'c',
               "original filename,filename,digit\nx,c0.png,0\nx,c1.png,1\nx,c2.png,2\nx,c3.png,3\nx,c4.png,4\nx,c5.png,"
               "5\nx,c6.png,6\n");
  write_source(dir.path(), 'b', "filename,digit\nb0.png,1\nb1.png,2\nb2.png,3\nb3.png,4\nb4.png,5\n");

  SUBCASE("one source") {
    const auto m = scan_sources(dir.path(), {'a'});
    CHECK(m.size() == 3);
    CHECK(m.provenance() == std::map<char, std::size_t>{{'a', 3}});
    CHECK(m[0].id == "a0");
    CHECK(m[0].label == 1);
    CHECK(m[0].image_path == dir.path() / "training-a" / "a0.png");
  }
  SUBCASE("two sources are a disjoint union") {
    const auto m = scan_sources(dir.path(), {'c', 'b'});
    CHECK(m.size() == 12);
    CHECK(m[0].source_tag == 'b');
    CHECK(m[5].source_tag == 'c');
  }
  SUBCASE("missing source") { CHECK_THROWS_AS(scan_sources(dir.path(), {'a', 'd'}), MissingSourceError); }
  SUBCASE("bad tag") { CHECK_THROWS_AS(scan_sources(dir.path(), {'g'}), ConfigError); }
  SUBCASE("missing label column") {
    CHECK_THROWS_AS(scan_sources(dir.path(), {'a'}, CsvColumns{"filename", "label"}), DataError);
  }
}

TEST_CASE("scan_sources collects malformed rows instead of throwing") {
  TempDir dir;
  write_source(dir.path(), 'e', "filename,digit\ne0.png,1\ne1.png\n,3\ne0.png,4\ne2.png,\ne3.png,x\ne4.png,12\n");
  const auto m = scan_sources(dir.path(), {'e'});
  CHECK(m.row_errors().size() == 3);  // wrong arity, empty filename, duplicate id
  REQUIRE(m.size() == 4);
  CHECK(m[0].label == 1);
  CHECK_FALSE(m[1].label.has_value());
  CHECK_FALSE(m[2].label.has_value());
  CHECK_FALSE(m[3].label.has_value());
  CHECK(m.class_counts().size() == 1);
}

TEST_CASE("validate_and_clean drops and accounts for every bad record") {
  TempDir dir;
  std::string csv = "filename,digit\n";
  for (int i = 0; i < 10; ++i) csv += "a" + std::to_string(i) + ".png," + std::to_string(i) + "\n";

  SUBCASE("all valid") {
    write_source(dir.path(), 'a', csv);
    for (int i = 0; i < 10; ++i) write_png(dir.path(), 'a', "a" + std::to_string(i) + ".png");
    const auto r = validate_and_clean(scan_sources(dir.path(), {'a'}));
    CHECK(r.log.kept == 10);
    CHECK(r.log == CleanLog{0, 0, 0, 10});
    CHECK(r.manifest.size() == 10);
  }
  SUBCASE("two empty label cells") {
    std::string edited = "filename,digit\n";
    for (int i = 0; i < 10; ++i) edited += "a" + std::to_string(i) + ".png," + (i < 2 ? "" : std::to_string(i)) + "\n";
    write_source(dir.path(), 'a', edited);
    for (int i = 0; i < 10; ++i) write_png(dir.path(), 'a', "a" + std::to_string(i) + ".png");
    const auto r = validate_and_clean(scan_sources(dir.path(), {'a'}));
    CHECK(r.log.kept == 8);
    CHECK(r.log.dropped_missing_label == 2);
    CHECK(r.log.total() == 10);
  }
  SUBCASE("truncated and missing files") {
    write_source(dir.path(), 'a', csv);
    for (int i = 0; i < 9; ++i) write_png(dir.path(), 'a', "a" + std::to_string(i) + ".png");
    const auto victim = dir.path() / "training-a" / "a3.png";
    const auto full = std::filesystem::file_size(victim);
    std::filesystem::resize_file(victim, full / 3);
    const auto r = validate_and_clean(scan_sources(dir.path(), {'a'}));
    CHECK(r.log.dropped_unreadable == 1);
    CHECK(r.log.dropped_missing_file == 1);
    CHECK(r.log.kept == 8);
    CHECK(r.log.total() == 10);
    CHECK_FALSE(r.manifest.ids().contains("a3"));
    CHECK_FALSE(r.manifest.ids().contains("a9"));
  }
}

TEST_CASE("clean accounting holds under random corruption") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TempDir dir;
    std::mt19937_64 rng(seed);
    std::string csv = "filename,digit\n";
    const int n = 30;
    std::filesystem::create_directories(dir.path() / "training-a");
    for (int i = 0; i < n; ++i) {
      const std::string name = "a" + std::to_string(i) + ".png";
      const int fate = static_cast<int>(rng() % 4);
      csv += name + "," + (fate == 0 ? std::string() : std::to_string(i % 10)) + "\n";
      if (fate == 1) continue;  // no file
      write_png(dir.path(), 'a', name);
      if (fate == 2) std::ofstream(dir.path() / "training-a" / name) << "not an image";
    }
    write_source(dir.path(), 'a', csv);
    const auto r = validate_and_clean(scan_sources(dir.path(), {'a'}));
    CHECK(r.log.total() == n);
    CHECK(r.manifest.size() == r.log.kept);
  }
}

TEST_CASE("load_image decodes colour and grey, and reports vanished files") {
  TempDir dir;
  write_source(dir.path(), 'a', "filename,digit\nrgb.png,1\ngrey.png,2\n");
  write_png(dir.path(), 'a', "rgb.png", 3);
  write_png(dir.path(), 'a', "grey.png", 1);
  const auto m = validate_and_clean(scan_sources(dir.path(), {'a'})).manifest;
  const auto rgb = load_image(m[0]);
  CHECK(rgb.height == 40);
  CHECK(rgb.width == 40);
  CHECK(rgb.channels == 3);
  CHECK(load_image(m[1]).channels == 1);
  std::filesystem::remove(m[0].image_path);
  CHECK_THROWS_AS(load_image(m[0]), DecodeError);
}

TEST_CASE("largest remainder allocation") {
  CHECK(largest_remainder(10, {50, 50}) == std::vector<std::size_t>{5, 5});
  CHECK(largest_remainder(3, {1, 1, 1, 1}) == std::vector<std::size_t>{1, 1, 1, 0});
  CHECK(largest_remainder(7, {5, 3, 2}) == std::vector<std::size_t>{4, 2, 1});  // 3.5, 2.1, 1.4
  CHECK(largest_remainder(0, {5, 3}) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("subsample") {
  const auto m = make_manifest({50, 50});
  SUBCASE("proportional") {
    const auto s = subsample(m, 10, 3);
    CHECK(s.size() == 10);
    CHECK(counts_of(s) == std::map<int, std::size_t>{{0, 5}, {1, 5}});
  }
  SUBCASE("full size is the identity") { CHECK(subsample(m, m.size(), 9) == m); }
  SUBCASE("too large") { CHECK_THROWS_AS(subsample(m, 101, 0), SubsampleTooLarge); }
  SUBCASE("deterministic in the seed") {
    CHECK(subsample(m, 37, 4) == subsample(m, 37, 4));
    CHECK_FALSE(subsample(m, 37, 4).ids() == subsample(m, 37, 5).ids());
  }
  SUBCASE("keeps manifest order") {
    const auto s = subsample(m, 20, 1);
    std::size_t last = 0;
    for (const auto& r : s.records()) {
      const auto pos = static_cast<std::size_t>(std::stoul(r.id.substr(1)));
      CHECK(pos >= last);
      last = pos;
    }
  }
}

TEST_CASE("subsample 17022 from a balanced 85000 pool") {
  const auto m = make_manifest(std::vector<std::size_t>(10, 8500));
  const auto s = subsample(m, 17022, 42);
  CHECK(s.size() == 17022);
  for (const auto& [label, count] : s.class_counts()) {
    CHECK(static_cast<double>(count) >= 1702.2 - 1.0);
    CHECK(static_cast<double>(count) <= 1702.2 + 1.0);
  }
}

TEST_CASE("stratified split arithmetic") {
  SUBCASE("17022 balanced at 0.8 without new data") {
    const auto m = make_manifest({1703, 1703, 1702, 1702, 1702, 1702, 1702, 1702, 1702, 1702});
    REQUIRE(m.size() == 17022);
    SplitSpec spec;
    spec.newdata_fraction = 0.0;
    const auto s = stratified_split(m, spec);
    CHECK(s.train.size() == 13617);
    CHECK(s.test.size() == 3405);
    CHECK(s.new_data.empty());
  }
  SUBCASE("ten records of one class") {
    const auto s = stratified_split(make_manifest({10}), SplitSpec{0, 0.8, 0.0, true});
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
  }
  SUBCASE("new data carved from the held-out part") {
    const auto s = stratified_split(make_manifest(std::vector<std::size_t>(10, 40)), SplitSpec{1, 0.8, 0.5, true});
    CHECK(s.train.size() == 320);
    CHECK(s.test.size() == 40);
    CHECK(s.new_data.size() == 40);
    for (const auto& [label, count] : s.test.class_counts()) CHECK(count == 4);
  }
  SUBCASE("degenerate classes") {
    CHECK_THROWS_AS(stratified_split(make_manifest({10, 1}), SplitSpec{}), DegenerateSplitError);
    // two records per class at 0.8: each class holds out one, leaving nothing for new data
    CHECK_THROWS_AS(stratified_split(make_manifest({2, 2}), SplitSpec{0, 0.8, 0.5, true}), DegenerateSplitError);
    CHECK_THROWS_AS(stratified_split(DatasetManifest{}, SplitSpec{}), DegenerateSplitError);
  }
  SUBCASE("bad fractions") {
    CHECK_THROWS_AS(stratified_split(make_manifest({10}), SplitSpec{0, 1.0, 0.0, true}), ConfigError);
    CHECK_THROWS_AS(stratified_split(make_manifest({10}), SplitSpec{0, 0.8, 1.0, true}), ConfigError);
  }
  SUBCASE("unstratified") {
    const auto s = stratified_split(make_manifest({7, 13}), SplitSpec{3, 0.75, 0.0, false});
    CHECK(s.train.size() == 15);
    CHECK(s.test.size() == 5);
  }
}

TEST_CASE("split partition, determinism and stratification properties") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::size_t> per_class;
    const std::size_t k = 1 + rng() % 10;
    for (std::size_t c = 0; c < k; ++c) per_class.push_back(5 + rng() % 60);
    const auto m = make_manifest(per_class);
    SplitSpec spec{rng(), 0.6 + 0.3 * static_cast<double>(rng() % 100) / 100.0, 0.0, true};
    CAPTURE(trial);
    const auto s = stratified_split(m, spec);
    const auto a = s.train.ids(), b = s.test.ids(), c = s.new_data.ids();
    std::set<std::string> all = a;
    all.insert(b.begin(), b.end());
    all.insert(c.begin(), c.end());
    CHECK(all == m.ids());
    CHECK(a.size() + b.size() + c.size() == m.size());

    const auto again = stratified_split(m, spec);
    CHECK(again.train.ids() == a);
    CHECK(again.test.ids() == b);

    const double ntrain = static_cast<double>(s.train.size());
    for (const auto& [label, count] : m.class_counts()) {
      const double got = static_cast<double>(s.train.class_counts().at(label)) / ntrain;
      const double want = static_cast<double>(count) / static_cast<double>(m.size());
      CHECK(std::abs(got - want) <= 1.0 / ntrain + 1e-12);
    }
  }
}

TEST_CASE("json round trips") {
  const auto m = make_manifest({3, 4});
  CHECK(manifest_from_json(to_json(m)) == m);
  const auto split = stratified_split(make_manifest({10, 10}), SplitSpec{});
  const auto back = split_from_json(to_json(split));
  CHECK(back.train == split.train);
  CHECK(back.test == split.test);
  CHECK(back.new_data == split.new_data);
  const CleanLog log{1, 2, 3, 4};
  CHECK(clean_log_from_json(to_json(log)) == log);
  const SplitSpec spec{9, 0.7, 0.25, false};
  const auto s2 = split_spec_from_json(to_json(spec));
  CHECK(s2.seed == 9);
  CHECK(s2.train_fraction == 0.7);
  CHECK(s2.newdata_fraction == 0.25);
  CHECK_FALSE(s2.stratified);

  const auto j = to_json(SampleRecord{"x1", "/p/x1.png", std::nullopt, 'f'});
  CHECK(j.at("label").is_null());
  CHECK(j.at("source_tag") == "f");
  CHECK(record_from_json(j).label == std::nullopt);

  TempDir dir;
  write_json_file(dir / "m.json", to_json(m));
  CHECK(manifest_from_json(read_json_file(dir / "m.json")) == m);
  CHECK_THROWS_AS(read_json_file(dir / "absent.json"), IoError);
}
