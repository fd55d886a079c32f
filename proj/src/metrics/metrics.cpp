#include "numta/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "numta/core/errors.hpp"

namespace numta {

std::size_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < k; ++j) s += at(c, j);
  return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t c) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < k; ++i) s += at(i, c);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < k; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
  if (y_true.size() != y_pred.size())
    throw LengthMismatch("y_true has " + std::to_string(y_true.size()) + " labels, y_pred " +
                         std::to_string(y_pred.size()));
  ConfusionMatrix cm{k, std::vector<std::size_t>(k * k, 0), y_true.size()};
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    const int a = y_true[t], b = y_pred[t];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= k || static_cast<std::size_t>(b) >= k)
      throw LabelOutOfRange("label pair (" + std::to_string(a) + ", " + std::to_string(b) + ") at index " +
                            std::to_string(t) + " outside [0," + std::to_string(k) + ")");
    ++cm.counts[static_cast<std::size_t>(a) * k + static_cast<std::size_t>(b)];
  }
  return cm;
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm, bool* zero_division) {
  std::vector<ClassMetrics> out;
  bool warned = false;
  for (std::size_t c = 0; c < cm.k; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const std::size_t predicted = cm.column_sum(c), actual = cm.row_sum(c);
    ClassMetrics m;
    m.label = static_cast<int>(c);
    m.support = actual;
    if (predicted > 0) m.precision = tp / static_cast<double>(predicted); else warned = true;
    if (actual > 0) m.recall = tp / static_cast<double>(actual); else warned = true;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    out.push_back(m);
  }
  if (zero_division) *zero_division = warned;
  return out;
}

Averages macro_average(std::span<const ClassMetrics> metrics) {
  if (metrics.empty()) throw EmptyList("macro average of no classes");
  Averages a;
  for (const auto& m : metrics) {
    a.precision += m.precision;
    a.recall += m.recall;
    a.f1 += m.f1;
  }
  const double n = static_cast<double>(metrics.size());
  return {a.precision / n, a.recall / n, a.f1 / n};
}

Averages weighted_average(std::span<const ClassMetrics> metrics) {
  std::size_t total = 0;
  Averages a;
  for (const auto& m : metrics) {
    const double w = static_cast<double>(m.support);
    total += m.support;
    a.precision += w * m.precision;
    a.recall += w * m.recall;
    a.f1 += w * m.f1;
  }
  if (total == 0) throw ZeroSupport("weighted average with zero total support");
  // Uniform weights: take the plain mean so it matches macro_average bit for bit.
  if (std::all_of(metrics.begin(), metrics.end(), [&](const ClassMetrics& m) { return m.support == metrics[0].support; }))
    return macro_average(metrics);
  const double n = static_cast<double>(total);
  return {a.precision / n, a.recall / n, a.f1 / n};
}

double micro_accuracy(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw EmptyMatrix("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.total);
}

Averages micro_average(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw EmptyMatrix("micro average of an empty confusion matrix");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < cm.k; ++c) {
    tp += cm.at(c, c);
    fp += cm.column_sum(c) - cm.at(c, c);
    fn += cm.row_sum(c) - cm.at(c, c);
  }
  const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
  // 2TP / (2TP + FP + FN): equals the accuracy exactly when FP = FN.
  const double f1 = tp == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
  return {p, r, f1};
}

ClassificationReport build_report(std::span<const int> y_true, std::span<const int> y_pred, std::size_t k) {
  const auto cm = confusion(y_true, y_pred, k);
  ClassificationReport r;
  r.per_class = per_class_metrics(cm, &r.zero_division);
  r.accuracy = micro_accuracy(cm);
  r.macro_avg = macro_average(r.per_class);
  r.weighted_avg = weighted_average(r.per_class);
  r.total_support = cm.total;
  return r;
}

std::string format_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The small bias keeps values such as 0.885 (stored as 0.88499999...) rounding up.
  const double rounded = std::floor(value * scale + 0.5 + 1e-9) / scale;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

std::string render_report_text(const ClassificationReport& r, int decimals) {
  const int width = std::max(decimals + 3, 9);
  std::ostringstream os;
  auto cell = [&](const std::string& s) {
    std::string pad(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, ' ');
    os << ' ' << pad << s;
  };
  auto label = [&](const std::string& s) { os << std::string(s.size() < 12 ? 12 - s.size() : 0, ' ') << s; };
  label("");
  cell("precision");
  cell("recall");
  cell("f1-score");
  cell("support");
  os << "\n\n";
  for (const auto& m : r.per_class) {
    label(std::to_string(m.label));
    cell(format_half_up(m.precision, decimals));
    cell(format_half_up(m.recall, decimals));
    cell(format_half_up(m.f1, decimals));
    cell(std::to_string(m.support));
    os << '\n';
  }
  os << '\n';
  label("accuracy");
  cell("");
  cell("");
  cell(format_half_up(r.accuracy, decimals));
  cell(std::to_string(r.total_support));
  os << '\n';
  for (const auto& [name, avg] : {std::pair{"macro avg", r.macro_avg}, std::pair{"weighted avg", r.weighted_avg}}) {
    label(name);
    cell(format_half_up(avg.precision, decimals));
    cell(format_half_up(avg.recall, decimals));
    cell(format_half_up(avg.f1, decimals));
    cell(std::to_string(r.total_support));
    os << '\n';
  }
  return os.str();
}

}  // namespace numta
