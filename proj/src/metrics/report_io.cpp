#include "numta/metrics/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>

#include "numta/core/errors.hpp"
#include "numta/datasetio/csv.hpp"
#include "numta/datasetio/manifest_json.hpp"

namespace numta {

namespace {

nlohmann::json avg_json(const Averages& a) { return {{"precision", a.precision}, {"recall", a.recall}, {"f1", a.f1}}; }

Averages avg_from(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(path.string() + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string& s, const std::filesystem::path& path) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(path.string() + ": bad count '" + s + "'");
  return v;
}

}  // namespace

nlohmann::json to_json(const ClassificationReport& r) {
  auto rows = nlohmann::json::array();
  for (const auto& m : r.per_class)
    rows.push_back({{"label", m.label},
                    {"precision", m.precision},
                    {"recall", m.recall},
                    {"f1", m.f1},
                    {"support", m.support}});
  return {{"per_class", rows},
          {"accuracy", r.accuracy},
          {"macro_avg", avg_json(r.macro_avg)},
          {"weighted_avg", avg_json(r.weighted_avg)},
          {"total_support", r.total_support},
          {"zero_division", r.zero_division}};
}

ClassificationReport report_from_json(const nlohmann::json& j) {
  try {
    ClassificationReport r;
    for (const auto& row : j.at("per_class"))
      r.per_class.push_back({row.at("label").get<int>(), row.at("precision").get<double>(),
                             row.at("recall").get<double>(), row.at("f1").get<double>(),
                             row.at("support").get<std::size_t>()});
    r.accuracy = j.at("accuracy").get<double>();
    r.macro_avg = avg_from(j.at("macro_avg"));
    r.weighted_avg = avg_from(j.at("weighted_avg"));
    r.total_support = j.at("total_support").get<std::size_t>();
    r.zero_division = j.value("zero_division", false);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

void write_report_json(const std::filesystem::path& path, const ClassificationReport& report) {
  write_json_file(path, to_json(report));
}

ClassificationReport read_report_json(const std::filesystem::path& path) { return report_from_json(read_json_file(path)); }

void write_report_csv(const std::filesystem::path& path, const ClassificationReport& r) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "label,precision,recall,f1,support\n";
  for (const auto& m : r.per_class)
    os << m.label << ',' << exact(m.precision) << ',' << exact(m.recall) << ',' << exact(m.f1) << ',' << m.support
       << '\n';
  os << "accuracy,,," << exact(r.accuracy) << ',' << r.total_support << '\n';
  os << csv::escape("macro avg") << ',' << exact(r.macro_avg.precision) << ',' << exact(r.macro_avg.recall) << ','
     << exact(r.macro_avg.f1) << ',' << r.total_support << '\n';
  os << csv::escape("weighted avg") << ',' << exact(r.weighted_avg.precision) << ','
     << exact(r.weighted_avg.recall) << ',' << exact(r.weighted_avg.f1) << ',' << r.total_support << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

ClassificationReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::string> row;
  if (!csv::read_row(is, row) || row != std::vector<std::string>{"label", "precision", "recall", "f1", "support"})
    throw DataError(path.string() + ": unexpected report header");
  ClassificationReport r;
  while (csv::read_row(is, row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != 5) throw DataError(path.string() + ": report rows have five cells");
    if (row[0] == "accuracy") {
      r.accuracy = parse_double(row[3], path);
      r.total_support = parse_count(row[4], path);
    } else if (row[0] == "macro avg" || row[0] == "weighted avg") {
      Averages a{parse_double(row[1], path), parse_double(row[2], path), parse_double(row[3], path)};
      (row[0] == "macro avg" ? r.macro_avg : r.weighted_avg) = a;
    } else {
      ClassMetrics m{static_cast<int>(parse_count(row[0], path)), parse_double(row[1], path),
                     parse_double(row[2], path), parse_double(row[3], path), parse_count(row[4], path)};
      r.per_class.push_back(m);
    }
  }
  return r;
}

}  // namespace numta
