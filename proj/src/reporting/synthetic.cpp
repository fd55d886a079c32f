#include "numta/reporting/synthetic.hpp"

#include <cstdio>
#include <fstream>
#include <random>

#include <opencv2/imgproc.hpp>

#include "numta/core/errors.hpp"

namespace numta {

ImageBuffer render_digit(int digit, std::uint64_t seed, std::size_t size) {
  if (digit < 0 || digit > 9) throw LabelOutOfRange("digit outside 0-9");
  std::mt19937_64 rng(seed * 10 + static_cast<std::uint64_t>(digit));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int fonts[] = {cv::FONT_HERSHEY_SIMPLEX, cv::FONT_HERSHEY_DUPLEX, cv::FONT_HERSHEY_COMPLEX,
                       cv::FONT_HERSHEY_TRIPLEX, cv::FONT_HERSHEY_SCRIPT_SIMPLEX};
  const int n = static_cast<int>(size);

  const double paper = 215 + 35 * u(rng);
  cv::Mat img(n, n, CV_8UC3,
              cv::Scalar(paper - 12 * u(rng), paper - 12 * u(rng), paper - 12 * u(rng)));
  const int font = fonts[rng() % std::size(fonts)];
  const int thickness = std::max(1, static_cast<int>(n / 24.0 * (0.7 + 0.8 * u(rng))));
  const double scale = n / 32.0 * (0.8 + 0.4 * u(rng));
  const std::string text(1, static_cast<char>('0' + digit));
  int base = 0;
  const auto extent = cv::getTextSize(text, font, scale, thickness, &base);
  const cv::Point origin((n - extent.width) / 2 + static_cast<int>((u(rng) - 0.5) * n * 0.15),
                         (n + extent.height) / 2 + static_cast<int>((u(rng) - 0.5) * n * 0.15));
  const double ink = 20 + 60 * u(rng);
  cv::putText(img, text, origin, font, scale, cv::Scalar(ink, ink, ink + 30 * u(rng)), thickness, cv::LINE_AA);

  const auto rot = cv::getRotationMatrix2D({n / 2.0f, n / 2.0f}, (u(rng) - 0.5) * 24.0, 1.0);
  cv::warpAffine(img, img, rot, img.size(), cv::INTER_LINEAR, cv::BORDER_REPLICATE);
  cv::Mat noise(img.size(), CV_16SC3);
  cv::RNG noise_rng(rng());  // never the global one: output must depend on the seed alone
  noise_rng.fill(noise, cv::RNG::NORMAL, 0, 6);
  cv::Mat mixed;
  img.convertTo(mixed, CV_16SC3);
  mixed += noise;
  mixed.convertTo(img, CV_8UC3);
  cv::cvtColor(img, img, cv::COLOR_BGR2RGB);

  ImageBuffer out{size, size, 3, {}};
  out.data.assign(img.datastart, img.dataend);
  return out;
}

DatasetManifest write_synthetic_dataset(const std::filesystem::path& root, const SyntheticSpec& spec) {
  std::vector<SampleRecord> records;
  std::uint64_t counter = 0;
  for (char tag : spec.sources) {
    const std::string stem = std::string("training-") + tag;
    const auto dir = root / stem;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::ofstream csv(root / (stem + ".csv"));
    if (!csv) throw IoError("cannot write " + (root / (stem + ".csv")).string());
    csv << "filename,digit,database name\n";
    std::size_t index = 0;
    // Interleave classes the way contributor files mix them.
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      for (int d = 0; d < 10; ++d) {
        char name[32];
        std::snprintf(name, sizeof name, "%c%05zu.png", tag, index++);
        const auto img = render_digit(d, spec.seed * 1000003 + counter++, spec.image_size);
        write_image(dir / name, img);
        csv << name << ',' << d << ",training-" << tag << '\n';
        records.push_back({std::filesystem::path(name).stem().string(), dir / name, d, tag});
      }
    }
    if (!csv) throw IoError("failed writing " + stem + ".csv");
  }
  return DatasetManifest(std::move(records));
}

}  // namespace numta
