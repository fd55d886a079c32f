#include "numta/reporting/plots.hpp"

#include <algorithm>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "numta/core/errors.hpp"
#include "numta/reporting/history.hpp"

namespace numta {

namespace {

constexpr int kWidth = 800, kHeight = 500;
constexpr int kLeft = 80, kRight = 30, kTop = 50, kBottom = 60;

const cv::Scalar kPalette[] = {{180, 119, 31}, {14, 127, 255}, {40, 39, 214}, {44, 160, 44},
                               {189, 103, 148}, {75, 86, 140}};

cv::Scalar colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string fmt(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct Frame {
  cv::Mat img;
  double x_min, x_max, y_min, y_max;

  cv::Point map(double x, double y) const {
    const double xs = x_max > x_min ? (x - x_min) / (x_max - x_min) : 0.5;
    const double ys = y_max > y_min ? (y - y_min) / (y_max - y_min) : 0.5;
    return {kLeft + static_cast<int>(xs * (kWidth - kLeft - kRight)),
            kHeight - kBottom - static_cast<int>(ys * (kHeight - kTop - kBottom))};
  }
};

Frame make_frame(const std::string& title, const std::string& x_label, const std::string& y_label, double x_min,
                 double x_max, double y_min, double y_max) {
  Frame f{cv::Mat(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255)), x_min, x_max, y_min, y_max};
  const cv::Scalar ink(40, 40, 40), grid(225, 225, 225);
  for (int t = 0; t <= 5; ++t) {
    const double y = y_min + (y_max - y_min) * t / 5.0;
    const auto p = f.map(x_min, y);
    cv::line(f.img, {kLeft, p.y}, {kWidth - kRight, p.y}, grid, 1);
    cv::putText(f.img, fmt(y, 2), {8, p.y + 5}, cv::FONT_HERSHEY_SIMPLEX, 0.45, ink, 1, cv::LINE_AA);
  }
  cv::rectangle(f.img, {kLeft, kTop}, {kWidth - kRight, kHeight - kBottom}, ink, 1);
  cv::putText(f.img, title, {kLeft, 32}, cv::FONT_HERSHEY_SIMPLEX, 0.7, ink, 2, cv::LINE_AA);
  cv::putText(f.img, x_label, {kWidth / 2 - 20, kHeight - 15}, cv::FONT_HERSHEY_SIMPLEX, 0.5, ink, 1, cv::LINE_AA);
  cv::putText(f.img, y_label, {8, kTop - 8}, cv::FONT_HERSHEY_SIMPLEX, 0.45, ink, 1, cv::LINE_AA);
  return f;
}

void legend(Frame& f, const std::vector<std::string>& names) {
  int y = kTop + 20;
  for (std::size_t i = 0; i < names.size(); ++i, y += 20) {
    cv::line(f.img, {kWidth - kRight - 170, y - 4}, {kWidth - kRight - 145, y - 4}, colour(i), 3);
    cv::putText(f.img, names[i], {kWidth - kRight - 140, y}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {40, 40, 40}, 1,
                cv::LINE_AA);
  }
}

void save(const std::filesystem::path& path, const cv::Mat& img) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), img);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace

PlotSpec draw_line_chart(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                         const std::vector<Series>& series, bool unit_range) {
  std::size_t n = 0;
  double top = 0.0;
  for (const auto& s : series) {
    n = std::max(n, s.values.size());
    for (double v : s.values) top = std::max(top, v);
  }
  if (n == 0) throw EmptyHistory("nothing to plot");
  PlotSpec spec{path, {}, 1.0, static_cast<double>(n), 0.0, unit_range ? 1.0 : (top > 0.0 ? top * 1.05 : 1.0)};
  for (const auto& s : series) spec.series.push_back(s.name);

  auto f = make_frame(title, "epoch", y_label, spec.x_min, spec.x_max, spec.y_min, spec.y_max);
  for (std::size_t e = 1; e <= n; e += std::max<std::size_t>(1, n / 10)) {
    const auto p = f.map(static_cast<double>(e), spec.y_min);
    cv::putText(f.img, std::to_string(e), {p.x - 5, p.y + 20}, cv::FONT_HERSHEY_SIMPLEX, 0.45, {40, 40, 40}, 1,
                cv::LINE_AA);
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& v = series[i].values;
    for (std::size_t e = 0; e < v.size(); ++e) {
      const auto p = f.map(static_cast<double>(e + 1), v[e]);
      cv::circle(f.img, p, 3, colour(i), cv::FILLED, cv::LINE_AA);
      if (e > 0) cv::line(f.img, f.map(static_cast<double>(e), v[e - 1]), p, colour(i), 2, cv::LINE_AA);
    }
  }
  legend(f, spec.series);
  save(path, f.img);
  return spec;
}

PlotFiles render_plots(const EpochHistory& history, const std::filesystem::path& out_dir) {
  if (history.empty()) throw EmptyHistory("cannot plot an empty history");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  PlotFiles out;
  out.loss = draw_line_chart(out_dir / "loss.png", "model loss", "loss",
                             {{"train", history.train_loss}, {"test", history.test_loss}}, false);
  out.accuracy = draw_line_chart(out_dir / "accuracy.png", "model accuracy", "accuracy",
                                 {{"train", history.train_accuracy}, {"test", history.test_accuracy}}, true);
  out.csv = out_dir / "history.csv";
  write_history_csv(out.csv, history);
  return out;
}

PlotSpec render_comparison_chart(const ComparisonTable& table, const std::filesystem::path& path) {
  if (table.rows.empty()) throw EmptyRuns("nothing to chart");
  const std::vector<std::string> metrics{"accuracy", "macro avg f1", "weighted avg f1"};
  const double groups = static_cast<double>(table.rows.size());
  PlotSpec spec{path, metrics, 0.0, groups, 0.0, 1.0};
  auto f = make_frame("model comparison", "model", "score", 0.0, groups, 0.0, 1.0);
  const double slot = 1.0 / 4.0;  // three bars and a gap per group
  for (std::size_t g = 0; g < table.rows.size(); ++g) {
    const auto& r = table.rows[g];
    const double values[3] = {r.accuracy, r.macro_f1, r.weighted_f1};
    for (int m = 0; m < 3; ++m) {
      const double x0 = static_cast<double>(g) + slot * (m + 0.5);
      const auto a = f.map(x0, 0.0), b = f.map(x0 + slot, values[m]);
      cv::rectangle(f.img, a, b, colour(static_cast<std::size_t>(m)), cv::FILLED);
      cv::putText(f.img, fmt(values[m], 2), {b.x, b.y - 4}, cv::FONT_HERSHEY_SIMPLEX, 0.35, {40, 40, 40}, 1,
                  cv::LINE_AA);
    }
    const auto label = f.map(static_cast<double>(g) + 0.1, 0.0);
    cv::putText(f.img, r.name + (r.best ? " *" : ""), {label.x, label.y + 20}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                {40, 40, 40}, 1, cv::LINE_AA);
  }
  legend(f, metrics);
  save(path, f.img);
  return spec;
}

std::pair<PlotSpec, PlotSpec> render_curve_comparison(
    const std::vector<std::pair<std::string, EpochHistory>>& runs, const std::filesystem::path& out_dir) {
  if (runs.empty()) throw EmptyRuns("nothing to chart");
  std::vector<Series> loss, acc;
  for (const auto& [name, h] : runs) {
    loss.push_back({name, h.test_loss});
    acc.push_back({name, h.test_accuracy});
  }
  return {draw_line_chart(out_dir / "comparison_loss.png", "test loss", "loss", loss, false),
          draw_line_chart(out_dir / "comparison_accuracy.png", "test accuracy", "accuracy", acc, true)};
}

}  // namespace numta
