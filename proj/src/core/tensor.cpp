#include "numta/core/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <sstream>

#include "numta/core/errors.hpp"

namespace numta {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, Scalar fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<Scalar> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_size(shape_))
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
}

void Tensor::fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  if (shape_size(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  const auto& ref = parts.front().shape();
  std::size_t channels = 0;
  for (const auto& p : parts) {
    if (p.rank() != 4 || p.dim(0) != ref[0] || p.dim(2) != ref[2] || p.dim(3) != ref[3])
      throw ShapeError("concat shape mismatch: " + shape_string(p.shape()) + " vs " + shape_string(ref));
    channels += p.dim(1);
  }
  const std::size_t n = ref[0], plane = ref[2] * ref[3];
  Tensor out({n, channels, ref[2], ref[3]});
  for (std::size_t b = 0; b < n; ++b) {
    Scalar* dst = out.data() + b * channels * plane;
    for (const auto& p : parts) {
      const std::size_t len = p.dim(1) * plane;
      std::memcpy(dst, p.data() + b * len, len * sizeof(Scalar));
      dst += len;
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& x, std::size_t begin, std::size_t count) {
  if (x.rank() != 4 || begin + count > x.dim(1)) throw ShapeError("channel slice out of range");
  const std::size_t n = x.dim(0), c = x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor out({n, count, x.dim(2), x.dim(3)});
  for (std::size_t b = 0; b < n; ++b)
    std::memcpy(out.data() + b * count * plane, x.data() + (b * c + begin) * plane, count * plane * sizeof(Scalar));
  return out;
}

}  // namespace numta
