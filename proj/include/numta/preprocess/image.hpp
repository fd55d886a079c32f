#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace numta {

/// 8-bit image, row-major, interleaved channels (RGB or a single gray channel).
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<std::uint8_t> data;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), data(h * w * c, fill) {}

  bool empty() const { return data.empty(); }
  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * channels + c]; }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * channels + c]; }

  bool operator==(const ImageBuffer&) const = default;
};

/// Decodes PNG/JPEG into RGB or gray. Alpha is dropped, 16-bit samples are
/// scaled to 8 bits. Returns nullopt when the file is missing or undecodable.
std::optional<ImageBuffer> try_decode_image(const std::filesystem::path& path);

/// Writes PNG (or any format OpenCV infers from the extension). Throws IoError.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

}  // namespace numta
