#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace numta {

/// Rows are true classes, columns predicted classes.
struct ConfusionMatrix {
  std::size_t k = 0;
  std::vector<std::size_t> counts;  // row-major k*k
  std::size_t total = 0;

  std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
  std::size_t row_sum(std::size_t c) const;
  std::size_t column_sum(std::size_t c) const;
  std::size_t trace() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws LengthMismatch or LabelOutOfRange.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k = 10);

struct ClassMetrics {
  int label = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool operator==(const ClassMetrics&) const = default;
};

struct Averages {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool operator==(const Averages&) const = default;
};

/// Zero denominators give 0; `zero_division` (if given) is set when that happened.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm, bool* zero_division = nullptr);

/// Unweighted mean over every class, zero-support ones included. Throws EmptyList.
Averages macro_average(std::span<const ClassMetrics> metrics);
/// Support-weighted mean. Throws ZeroSupport.
Averages weighted_average(std::span<const ClassMetrics> metrics);
/// trace / total. Throws EmptyMatrix.
double micro_accuracy(const ConfusionMatrix& cm);
/// Micro-pooled precision, recall and f1. For single-label data all equal the accuracy.
Averages micro_average(const ConfusionMatrix& cm);

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;
  double accuracy = 0.0;
  Averages macro_avg;
  Averages weighted_avg;
  std::size_t total_support = 0;
  bool zero_division = false;  // some precision or recall had a zero denominator
  bool operator==(const ClassificationReport&) const = default;
};

ClassificationReport build_report(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k = 10);

/// Half-up rounding to `decimals` places, formatted.
std::string format_half_up(double value, int decimals = 2);

/// Classification-report table: a row per class, then accuracy (precision and
/// recall left blank), macro avg and weighted avg.
std::string render_report_text(const ClassificationReport& report, int decimals = 2);

}  // namespace numta
