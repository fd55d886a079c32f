#include "numta/preprocess/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "numta/core/errors.hpp"

namespace numta {

std::optional<ImageBuffer> try_decode_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    return std::nullopt;
  }
  if (raw.empty()) return std::nullopt;

  cv::Mat img = raw;
  if (img.depth() == CV_16U) img.convertTo(img, CV_8U, 1.0 / 257.0);
  if (img.depth() != CV_8U) return std::nullopt;

  cv::Mat out;
  switch (img.channels()) {
    case 1: out = img; break;
    case 2: cv::extractChannel(img, out, 0); break;
    case 3: cv::cvtColor(img, out, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(img, out, cv::COLOR_BGRA2RGB); break;
    default: return std::nullopt;
  }
  if (!out.isContinuous()) out = out.clone();

  ImageBuffer buf(static_cast<std::size_t>(out.rows), static_cast<std::size_t>(out.cols),
                  static_cast<std::size_t>(out.channels()));
  std::copy(out.data, out.data + buf.data.size(), buf.data.begin());
  return buf;
}

void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  if (image.channels != 1 && image.channels != 3) throw UnsupportedChannels("can only write 1- or 3-channel images");
  cv::Mat view(static_cast<int>(image.height), static_cast<int>(image.width),
               image.channels == 1 ? CV_8UC1 : CV_8UC3, const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat bgr;
  if (image.channels == 3)
    cv::cvtColor(view, bgr, cv::COLOR_RGB2BGR);
  else
    bgr = view;
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace numta
