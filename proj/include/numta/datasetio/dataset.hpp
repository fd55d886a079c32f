#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "numta/preprocess/image.hpp"

namespace numta {

inline constexpr int kNumClasses = 10;

struct SampleRecord {
  std::string id;  // filename stem, unique within a manifest
  std::filesystem::path image_path;
  std::optional<int> label;  // empty when the label cell was blank or not a digit 0-9
  char source_tag = 'a';

  bool operator==(const SampleRecord&) const = default;
};

/// A CSV row that could not become a record.
struct RowError {
  std::string source;  // e.g. "training-a.csv"
  std::size_t line = 0;
  std::string message;

  bool operator==(const RowError&) const = default;
};

/// Immutable inventory of samples. Counts are derived from the records.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  /// Throws DataError on duplicate ids.
  explicit DatasetManifest(std::vector<SampleRecord> records, std::vector<RowError> row_errors = {});

  const std::vector<SampleRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const SampleRecord& operator[](std::size_t i) const { return records_[i]; }

  /// label -> count over labelled records.
  const std::map<int, std::size_t>& class_counts() const { return class_counts_; }
  /// source tag -> count.
  const std::map<char, std::size_t>& provenance() const { return provenance_; }
  const std::vector<RowError>& row_errors() const { return row_errors_; }

  std::set<std::string> ids() const;
  bool fully_labelled() const;

  bool operator==(const DatasetManifest& other) const {
    return records_ == other.records_ && row_errors_ == other.row_errors_;
  }

 private:
  std::vector<SampleRecord> records_;
  std::vector<RowError> row_errors_;
  std::map<int, std::size_t> class_counts_;
  std::map<char, std::size_t> provenance_;
};

struct CsvColumns {
  std::string filename = "filename";
  std::string label = "digit";
};

/// Reads `<root>/training-<t>.csv` for each tag (alphabetical), resolving
/// images under `<root>/training-<t>/`. Bad rows land in row_errors().
/// Throws MissingSourceError when a tag has no CSV.
DatasetManifest scan_sources(const std::filesystem::path& root, const std::set<char>& tags,
                             const CsvColumns& columns = {});

struct CleanLog {
  std::size_t dropped_missing_label = 0;
  std::size_t dropped_missing_file = 0;
  std::size_t dropped_unreadable = 0;
  std::size_t kept = 0;

  std::size_t total() const { return dropped_missing_label + dropped_missing_file + dropped_unreadable + kept; }
  bool operator==(const CleanLog&) const = default;
};

struct CleanResult {
  DatasetManifest manifest;
  CleanLog log;
};

/// Drops (never repairs) records without a label, without a file, or whose file
/// does not decode. Decoding runs in parallel; the output keeps input order.
CleanResult validate_and_clean(const DatasetManifest& manifest);

/// Exactly n records, class-proportional by largest remainder, chosen with a
/// seeded shuffle per class. Keeps manifest order. Throws SubsampleTooLarge.
DatasetManifest subsample(const DatasetManifest& manifest, std::size_t n, std::uint64_t seed);

struct SplitSpec {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  double newdata_fraction = 0.5;  // share of the held-out part that becomes new_data
  bool stratified = true;

  void validate() const;
};

struct SplitResult {
  DatasetManifest train;
  DatasetManifest test;
  DatasetManifest new_data;
};

/// The held-out part has ceil((1 - train_fraction) * N) records; new_data takes
/// floor(newdata_fraction * held_out) of them. Under stratification each count
/// is spread over classes by largest remainder. Throws DegenerateSplitError.
SplitResult stratified_split(const DatasetManifest& manifest, const SplitSpec& spec);

/// Decodes the record's image. Throws DecodeError if it is gone or corrupt.
ImageBuffer load_image(const SampleRecord& record);

/// Splits `total` into per-bucket quotas proportional to `weights`, flooring
/// and handing leftovers to the largest remainders (ties to the lower index).
std::vector<std::size_t> largest_remainder(std::size_t total, const std::vector<std::size_t>& weights);

}  // namespace numta
