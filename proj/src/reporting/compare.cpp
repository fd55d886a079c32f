#include "numta/reporting/compare.hpp"

#include <algorithm>

#include "numta/core/errors.hpp"

namespace numta {

EpochDelta epoch_delta(const EpochHistory& history, const std::string& name) {
  if (history.test_accuracy.empty()) throw EmptyHistory("run '" + name + "' has no epochs");
  const double first = history.test_accuracy.front(), last = history.test_accuracy.back();
  return {name, first, last, last - first};
}

ComparisonTable compare(const std::vector<RunResult>& runs) {
  if (runs.empty()) throw EmptyRuns("nothing to compare");
  ComparisonTable t;
  for (const auto& r : runs) {
    if (r.history.empty()) throw EmptyHistory("run '" + r.name + "' has no epochs");
    t.rows.push_back({r.name, r.report.accuracy, r.report.macro_avg.f1, r.report.weighted_avg.f1,
                      r.history.test_loss.back(), r.history.test_accuracy.back(), false});
  }
  std::sort(t.rows.begin(), t.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.name < b.name;
  });
  t.rows.front().best = true;
  for (const auto& row : t.rows) {
    const auto it = std::find_if(runs.begin(), runs.end(), [&](const RunResult& r) { return r.name == row.name; });
    t.deltas.push_back(epoch_delta(it->history, it->name));
  }
  return t;
}

nlohmann::json to_json(const ComparisonTable& t) {
  auto rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"name", r.name},
                    {"accuracy", r.accuracy},
                    {"macro_f1", r.macro_f1},
                    {"weighted_f1", r.weighted_f1},
                    {"final_test_loss", r.final_test_loss},
                    {"final_test_accuracy", r.final_test_accuracy},
                    {"best", r.best}});
  auto deltas = nlohmann::json::array();
  for (const auto& d : t.deltas)
    deltas.push_back({{"name", d.name},
                      {"accuracy_at_1", d.accuracy_at_1},
                      {"accuracy_at_last", d.accuracy_at_last},
                      {"difference", d.difference}});
  return {{"rows", rows}, {"epoch_deltas", deltas}};
}

ComparisonTable comparison_from_json(const nlohmann::json& j) {
  try {
    ComparisonTable t;
    for (const auto& r : j.at("rows"))
      t.rows.push_back({r.at("name").get<std::string>(), r.at("accuracy").get<double>(),
                        r.at("macro_f1").get<double>(), r.at("weighted_f1").get<double>(),
                        r.at("final_test_loss").get<double>(), r.at("final_test_accuracy").get<double>(),
                        r.at("best").get<bool>()});
    for (const auto& d : j.at("epoch_deltas"))
      t.deltas.push_back({d.at("name").get<std::string>(), d.at("accuracy_at_1").get<double>(),
                          d.at("accuracy_at_last").get<double>(), d.at("difference").get<double>()});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed comparison: ") + e.what());
  }
}

}  // namespace numta
