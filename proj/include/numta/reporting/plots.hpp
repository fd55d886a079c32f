#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "numta/reporting/compare.hpp"
#include "numta/training/trainer.hpp"

namespace numta {

/// What a chart shows, returned so tests can check it without reading pixels.
struct PlotSpec {
  std::filesystem::path path;
  std::vector<std::string> series;  // legend entries
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
};

struct Series {
  std::string name;
  std::vector<double> values;  // plotted against x = 1, 2, ...
};

/// Line chart of series over epochs. Throws IoError.
PlotSpec draw_line_chart(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                         const std::vector<Series>& series, bool unit_range);

struct PlotFiles {
  PlotSpec loss;
  PlotSpec accuracy;
  std::filesystem::path csv;
};

/// Writes loss.png and accuracy.png (train and test series each) plus history.csv.
/// Throws EmptyHistory, IoError.
PlotFiles render_plots(const EpochHistory& history, const std::filesystem::path& out_dir);

/// Grouped bars of accuracy, macro f1 and weighted f1 per run.
PlotSpec render_comparison_chart(const ComparisonTable& table, const std::filesystem::path& path);

/// Test loss and test accuracy of several runs on shared axes; writes
/// comparison_loss.png and comparison_accuracy.png.
std::pair<PlotSpec, PlotSpec> render_curve_comparison(
    const std::vector<std::pair<std::string, EpochHistory>>& runs, const std::filesystem::path& out_dir);

}  // namespace numta
