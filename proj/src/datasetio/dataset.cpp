#include "numta/datasetio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include "numta/core/errors.hpp"
#include "numta/datasetio/csv.hpp"

namespace numta {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<int> parse_label(const std::string& cell) {
  const std::string t = trim(cell);
  if (t.empty() || t.size() > 3) return std::nullopt;
  int value = 0;
  for (char c : t) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  if (value >= kNumClasses) return std::nullopt;
  return value;
}

std::vector<std::size_t> indices_of_class(const DatasetManifest& m, int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].label == label) out.push_back(i);
  return out;
}

void require_labelled(const DatasetManifest& m, const char* op) {
  if (!m.fully_labelled())
    throw DataError(std::string(op) + " needs a cleaned manifest; some records have no label");
}

DatasetManifest pick(const DatasetManifest& m, std::vector<std::size_t> indices) {
  std::sort(indices.begin(), indices.end());
  std::vector<SampleRecord> records;
  records.reserve(indices.size());
  for (auto i : indices) records.push_back(m[i]);
  return DatasetManifest(std::move(records));
}

}  // namespace

// ---------------------------------------------------------------- manifest

DatasetManifest::DatasetManifest(std::vector<SampleRecord> records, std::vector<RowError> row_errors)
    : records_(std::move(records)), row_errors_(std::move(row_errors)) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records_) {
    if (!seen.insert(r.id).second) throw DataError("duplicate sample id '" + r.id + "'");
    if (r.label) ++class_counts_[*r.label];
    ++provenance_[r.source_tag];
  }
}

std::set<std::string> DatasetManifest::ids() const {
  std::set<std::string> out;
  for (const auto& r : records_) out.insert(r.id);
  return out;
}

bool DatasetManifest::fully_labelled() const {
  return std::all_of(records_.begin(), records_.end(), [](const SampleRecord& r) { return r.label.has_value(); });
}

// ---------------------------------------------------------------- scan

DatasetManifest scan_sources(const std::filesystem::path& root, const std::set<char>& tags, const CsvColumns& columns) {
  if (!std::filesystem::is_directory(root)) throw DataError("dataset root " + root.string() + " is not a directory");
  std::vector<SampleRecord> records;
  std::vector<RowError> errors;
  std::unordered_set<std::string> seen;

  for (char tag : tags) {
    if (tag < 'a' || tag > 'f') throw ConfigError(std::string("unknown source tag '") + tag + "'");
    const std::string stem = std::string("training-") + tag;
    const auto csv_path = root / (stem + ".csv");
    std::ifstream in(csv_path);
    if (!in) throw MissingSourceError("source '" + std::string(1, tag) + "' has no label file " + csv_path.string());

    std::vector<std::string> header;
    if (!csv::read_row(in, header)) throw DataError(csv_path.string() + " is empty");
    for (auto& h : header) h = trim(h);
    const auto col = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw DataError(csv_path.string() + " has no '" + name + "' column");
      return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t file_col = col(columns.filename), label_col = col(columns.label);
    const std::string source = stem + ".csv";

    std::vector<std::string> fields;
    std::size_t line = 1;
    while (csv::read_row(in, fields)) {
      ++line;
      if (fields.size() == 1 && trim(fields[0]).empty()) continue;
      if (fields.size() != header.size()) {
        errors.push_back({source, line,
                          "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size())});
        continue;
      }
      const std::string filename = trim(fields[file_col]);
      if (filename.empty()) {
        errors.push_back({source, line, "empty filename"});
        continue;
      }
      SampleRecord rec;
      rec.id = std::filesystem::path(filename).stem().string();
      rec.image_path = root / stem / filename;
      rec.label = parse_label(fields[label_col]);
      rec.source_tag = tag;
      if (!seen.insert(rec.id).second) {
        errors.push_back({source, line, "duplicate id '" + rec.id + "'"});
        continue;
      }
      records.push_back(std::move(rec));
    }
  }
  return DatasetManifest(std::move(records), std::move(errors));
}

// ---------------------------------------------------------------- clean

CleanResult validate_and_clean(const DatasetManifest& manifest) {
  enum class Verdict : std::uint8_t { keep, no_label, no_file, unreadable };
  const auto& recs = manifest.records();
  std::vector<Verdict> verdicts(recs.size(), Verdict::keep);

#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < recs.size(); ++i) {
    std::error_code ec;
    if (!recs[i].label)
      verdicts[i] = Verdict::no_label;
    else if (!std::filesystem::is_regular_file(recs[i].image_path, ec))
      verdicts[i] = Verdict::no_file;
    else if (!try_decode_image(recs[i].image_path))
      verdicts[i] = Verdict::unreadable;
  }

  CleanLog log;
  std::vector<SampleRecord> kept;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    switch (verdicts[i]) {
      case Verdict::keep: kept.push_back(recs[i]); ++log.kept; break;
      case Verdict::no_label: ++log.dropped_missing_label; break;
      case Verdict::no_file: ++log.dropped_missing_file; break;
      case Verdict::unreadable: ++log.dropped_unreadable; break;
    }
  }
  return {DatasetManifest(std::move(kept), manifest.row_errors()), log};
}

// ---------------------------------------------------------------- subsample / split

std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<std::size_t>& weights) {
  const std::size_t sum = std::accumulate(weights.begin(), weights.end(), std::size_t{0});
  std::vector<std::size_t> quota(weights.size(), 0);
  if (sum == 0 || total == 0) return quota;
  if (total > sum) throw std::invalid_argument("largest_remainder: total exceeds the weight sum");
  std::vector<std::size_t> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const unsigned __int128 num = static_cast<unsigned __int128>(total) * weights[i];
    quota[i] = static_cast<std::size_t>(num / sum);
    remainder[i] = static_cast<std::size_t>(num % sum);
    assigned += quota[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++quota[order[k]];
  return quota;
}

DatasetManifest subsample(const DatasetManifest& manifest, std::size_t n, std::uint64_t seed) {
  if (n > manifest.size())
    throw SubsampleTooLarge("cannot draw " + std::to_string(n) + " samples from " + std::to_string(manifest.size()));
  require_labelled(manifest, "subsample");

  std::vector<int> labels;
  std::vector<std::size_t> counts;
  for (const auto& [label, count] : manifest.class_counts()) {
    labels.push_back(label);
    counts.push_back(count);
  }
  const auto quota = largest_remainder(n, counts);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < labels.size(); ++c) {
    auto idx = indices_of_class(manifest, labels[c]);
    std::shuffle(idx.begin(), idx.end(), rng);
    chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  return pick(manifest, std::move(chosen));
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
  if (!(newdata_fraction >= 0.0 && newdata_fraction < 1.0)) throw ConfigError("newdata_fraction must lie in [0, 1)");
}

SplitResult stratified_split(const DatasetManifest& manifest, const SplitSpec& spec) {
  spec.validate();
  if (manifest.empty()) throw DegenerateSplitError("cannot split an empty manifest");
  require_labelled(manifest, "stratified_split");

  const std::size_t total = manifest.size();
  // ceil with a guard against 0.2 * N landing a hair above an integer.
  const auto held_total = static_cast<std::size_t>(
      std::clamp(std::ceil((1.0 - spec.train_fraction) * static_cast<double>(total) - 1e-9), 0.0,
                 static_cast<double>(total)));
  const auto new_of = [&](std::size_t held) {
    return static_cast<std::size_t>(std::floor(spec.newdata_fraction * static_cast<double>(held) + 1e-9));
  };

  std::mt19937_64 rng(spec.seed);
  std::vector<std::size_t> train_idx, test_idx, new_idx;
  const auto deal = [&](std::vector<std::size_t>& idx, std::size_t n_test, std::size_t n_new) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_train = idx.size() - n_test - n_new;
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                    idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    new_idx.insert(new_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), idx.end());
  };

  if (!spec.stratified) {
    if (held_total == 0 || held_total == total)
      throw DegenerateSplitError("split leaves the training or held-out partition empty");
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t n_new = new_of(held_total);
    deal(idx, held_total - n_new, n_new);
  } else {
    std::vector<int> labels;
    std::vector<std::size_t> counts;
    for (const auto& [label, count] : manifest.class_counts()) {
      if (count < 2)
        throw DegenerateSplitError("class " + std::to_string(label) + " has fewer than 2 records");
      labels.push_back(label);
      counts.push_back(count);
    }
    const auto held = largest_remainder(held_total, counts);
    const auto fresh = largest_remainder(new_of(held_total), held);
    for (std::size_t c = 0; c < labels.size(); ++c) {
      const std::size_t n_test = held[c] - fresh[c];
      const bool empty_part = held[c] == counts[c] || held[c] == 0 ||
                              (spec.newdata_fraction > 0.0 && (n_test == 0 || fresh[c] == 0));
      if (empty_part)
        throw DegenerateSplitError("class " + std::to_string(labels[c]) + " would leave a partition empty");
      auto idx = indices_of_class(manifest, labels[c]);
      deal(idx, n_test, fresh[c]);
    }
  }
  return {pick(manifest, std::move(train_idx)), pick(manifest, std::move(test_idx)), pick(manifest, std::move(new_idx))};
}

ImageBuffer load_image(const SampleRecord& record) {
  auto img = try_decode_image(record.image_path);
  if (!img) throw DecodeError("cannot decode " + record.image_path.string());
  return std::move(*img);
}

}  // namespace numta
