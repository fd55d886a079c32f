#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "numta/metrics/metrics.hpp"
#include "numta/training/trainer.hpp"

namespace numta {

/// Test accuracy after the first and the last epoch.
struct EpochDelta {
  std::string name;
  double accuracy_at_1 = 0.0;
  double accuracy_at_last = 0.0;
  double difference = 0.0;  // accuracy_at_last - accuracy_at_1, as computed in double
  bool operator==(const EpochDelta&) const = default;
};

/// Throws EmptyHistory.
EpochDelta epoch_delta(const EpochHistory& history, const std::string& name);

struct RunResult {
  std::string name;
  ClassificationReport report;
  EpochHistory history;
};

struct ComparisonRow {
  std::string name;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double final_test_loss = 0.0;
  double final_test_accuracy = 0.0;
  bool best = false;
  bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;  // descending accuracy, ties by name
  std::vector<EpochDelta> deltas;   // same order as rows
  bool operator==(const ComparisonTable&) const = default;
};

/// Throws EmptyRuns, or EmptyHistory for a run without epochs.
ComparisonTable compare(const std::vector<RunResult>& runs);

nlohmann::json to_json(const ComparisonTable& table);
ComparisonTable comparison_from_json(const nlohmann::json& j);

}  // namespace numta
