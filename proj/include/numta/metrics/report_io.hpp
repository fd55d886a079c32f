#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "numta/metrics/metrics.hpp"

namespace numta {

// JSON: {per_class: [{label, precision, recall, f1, support}], accuracy,
//        macro_avg: {precision, recall, f1}, weighted_avg: {...}, total_support, zero_division}
nlohmann::json to_json(const ClassificationReport& report);
ClassificationReport report_from_json(const nlohmann::json& j);

// CSV: label,precision,recall,f1,support with rows 0..9, then accuracy, macro avg,
// weighted avg. The accuracy row leaves precision and recall empty.
// Values are written with 17 significant digits so they read back exactly. The
// zero_division flag is JSON-only and reads back as false.
void write_report_csv(const std::filesystem::path& path, const ClassificationReport& report);
ClassificationReport read_report_csv(const std::filesystem::path& path);

void write_report_json(const std::filesystem::path& path, const ClassificationReport& report);
ClassificationReport read_report_json(const std::filesystem::path& path);

}  // namespace numta
