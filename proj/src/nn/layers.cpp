#include "numta/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "numta/core/errors.hpp"

namespace numta::nn {
namespace {

void require_cache(const Tensor& t, std::string_view layer) {
  if (t.empty()) throw std::logic_error(std::string(layer) + ": backward without a train-phase forward");
}

void require_nchw(const Tensor& x, std::string_view layer) {
  if (x.rank() != 4) throw ShapeError(std::string(layer) + " expects NCHW input, got " + shape_string(x.shape()));
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(const Conv2dOptions& options) : options_(options) {
  if (options.groups == 0 || options.in_channels % options.groups || options.out_channels % options.groups)
    throw ShapeError("conv channels must divide evenly into groups");
  const Shape wshape{options.out_channels, options.in_channels / options.groups, options.kernel.first,
                     options.kernel.second};
  weight_ = Tensor(wshape);
  weight_grad_ = Tensor(wshape);
  if (options.bias) {
    bias_ = Tensor({options.out_channels});
    bias_grad_ = Tensor({options.out_channels});
  }
}

kernels::ConvGeometry Conv2d::geometry(const Tensor& x) const {
  require_nchw(x, "Conv2d");
  if (x.dim(1) != options_.in_channels)
    throw ShapeError("Conv2d expects " + std::to_string(options_.in_channels) + " channels, got " +
                     std::to_string(x.dim(1)));
  kernels::ConvGeometry g;
  g.batch = x.dim(0);
  g.in_channels = options_.in_channels;
  g.in_h = x.dim(2);
  g.in_w = x.dim(3);
  g.out_channels = options_.out_channels;
  g.kernel_h = options_.kernel.first;
  g.kernel_w = options_.kernel.second;
  g.stride_h = options_.stride.first;
  g.stride_w = options_.stride.second;
  g.pad_h = options_.padding.first;
  g.pad_w = options_.padding.second;
  g.groups = options_.groups;
  if (!g.valid()) throw ShapeError("Conv2d input " + shape_string(x.shape()) + " is smaller than its kernel");
  return g;
}

Tensor Conv2d::forward(const Tensor& x, Phase phase) {
  const auto g = geometry(x);
  Tensor y({g.batch, g.out_channels, g.out_h(), g.out_w()});
  kernels::conv2d_forward(g, x.data(), weight_.data(), options_.bias ? bias_.data() : nullptr, y.data());
  if (phase == Phase::train) input_ = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
  require_cache(input_, "Conv2d");
  const auto g = geometry(input_);
  kernels::conv2d_backward_weights(g, input_.data(), dy.data(), weight_grad_.data(),
                                   options_.bias ? bias_grad_.data() : nullptr);
  Tensor dx(input_.shape());
  kernels::conv2d_backward_data(g, weight_.data(), dy.data(), dx.data());
  return dx;
}

void Conv2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  const std::size_t fan_in = weight_.dim(1) * weight_.dim(2) * weight_.dim(3);
  out.push_back({prefix + "weight", &weight_, &weight_grad_, ParamRole::kernel, fan_in});
  if (options_.bias) out.push_back({prefix + "bias", &bias_, &bias_grad_, ParamRole::bias, 0});
}

// ---------------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(std::size_t channels, Scalar eps, Scalar momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_({channels}, 1.0),
      beta_({channels}, 0.0),
      gamma_grad_({channels}),
      beta_grad_({channels}),
      running_mean_({channels}, 0.0),
      running_var_({channels}, 1.0) {}

Tensor BatchNorm2d::forward(const Tensor& x, Phase phase) {
  require_nchw(x, "BatchNorm2d");
  if (x.dim(1) != channels_) throw ShapeError("BatchNorm2d channel mismatch");
  const std::size_t n = x.dim(0), plane = x.dim(2) * x.dim(3);
  Tensor y(x.shape());

  if (phase == Phase::infer) {
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < channels_; ++c) {
      const Scalar scale = gamma_[c] / std::sqrt(running_var_[c] + eps_);
      const Scalar shift = beta_[c] - running_mean_[c] * scale;
      for (std::size_t b = 0; b < n; ++b) {
        const Scalar* src = x.data() + (b * channels_ + c) * plane;
        Scalar* dst = y.data() + (b * channels_ + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * scale + shift;
      }
    }
    return y;
  }

  normalized_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0);
  const Scalar count = static_cast<Scalar>(n * plane);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < channels_; ++c) {
    Scalar sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const Scalar* src = x.data() + (b * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) sum += src[i];
    }
    const Scalar mean = sum / count;
    Scalar sq = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const Scalar* src = x.data() + (b * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) sq += (src[i] - mean) * (src[i] - mean);
    }
    const Scalar var = sq / count;
    const Scalar inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv;
    for (std::size_t b = 0; b < n; ++b) {
      const Scalar* src = x.data() + (b * channels_ + c) * plane;
      Scalar* xh = normalized_.data() + (b * channels_ + c) * plane;
      Scalar* dst = y.data() + (b * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        xh[i] = (src[i] - mean) * inv;
        dst[i] = gamma_[c] * xh[i] + beta_[c];
      }
    }
    const Scalar unbiased = count > 1 ? sq / (count - 1) : var;
    running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean;
    running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * unbiased;
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  require_cache(normalized_, "BatchNorm2d");
  const std::size_t n = dy.dim(0), plane = dy.dim(2) * dy.dim(3);
  const Scalar count = static_cast<Scalar>(n * plane);
  Tensor dx(dy.shape());
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < channels_; ++c) {
    Scalar dgamma = 0.0, dbeta = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const Scalar* g = dy.data() + (b * channels_ + c) * plane;
      const Scalar* xh = normalized_.data() + (b * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        dgamma += g[i] * xh[i];
        dbeta += g[i];
      }
    }
    gamma_grad_[c] = dgamma;
    beta_grad_[c] = dbeta;
    const Scalar k = gamma_[c] * inv_std_[c] / count;
    for (std::size_t b = 0; b < n; ++b) {
      const Scalar* g = dy.data() + (b * channels_ + c) * plane;
      const Scalar* xh = normalized_.data() + (b * channels_ + c) * plane;
      Scalar* dst = dx.data() + (b * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) dst[i] = k * (count * g[i] - dbeta - xh[i] * dgamma);
    }
  }
  return dx;
}

void BatchNorm2d::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + "weight", &gamma_, &gamma_grad_, ParamRole::norm_scale, 0});
  out.push_back({prefix + "bias", &beta_, &beta_grad_, ParamRole::norm_shift, 0});
  out.push_back({prefix + "running_mean", &running_mean_, nullptr, ParamRole::running_mean, 0});
  out.push_back({prefix + "running_var", &running_var_, nullptr, ParamRole::running_var, 0});
}

// ---------------------------------------------------------------- Activation

std::string_view Activation::type() const {
  switch (kind_) {
    case ActivationKind::relu: return "ReLU";
    case ActivationKind::silu: return "SiLU";
    case ActivationKind::sigmoid: return "Sigmoid";
  }
  return "Activation";
}

Tensor Activation::forward(const Tensor& x, Phase phase) {
  Tensor y(x.shape());
  const std::size_t size = x.size();
  const Scalar* src = x.data();
  Scalar* dst = y.data();
  switch (kind_) {
    case ActivationKind::relu:
#pragma omp parallel for simd schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
      break;
    case ActivationKind::silu:
#pragma omp parallel for schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) dst[i] = src[i] / (1.0 + std::exp(-src[i]));
      break;
    case ActivationKind::sigmoid:
#pragma omp parallel for schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) dst[i] = 1.0 / (1.0 + std::exp(-src[i]));
      break;
  }
  if (phase == Phase::train) cache_ = kind_ == ActivationKind::silu ? x : y;
  return y;
}

Tensor Activation::backward(const Tensor& dy) {
  require_cache(cache_, type());
  Tensor dx(dy.shape());
  const std::size_t size = dy.size();
  const Scalar* c = cache_.data();
  const Scalar* g = dy.data();
  Scalar* dst = dx.data();
  switch (kind_) {
    case ActivationKind::relu:
#pragma omp parallel for simd schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) dst[i] = c[i] > 0.0 ? g[i] : 0.0;
      break;
    case ActivationKind::silu:
#pragma omp parallel for schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) {
        const Scalar s = 1.0 / (1.0 + std::exp(-c[i]));
        dst[i] = g[i] * s * (1.0 + c[i] * (1.0 - s));
      }
      break;
    case ActivationKind::sigmoid:
#pragma omp parallel for simd schedule(static) if (size > 65536)
      for (std::size_t i = 0; i < size; ++i) dst[i] = g[i] * c[i] * (1.0 - c[i]);
      break;
  }
  return dx;
}

// ---------------------------------------------------------------- pooling

MaxPool2d::MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t padding)
    : kernel_(kernel), stride_(stride), padding_(padding) {}

kernels::PoolGeometry MaxPool2d::geometry(const Shape& s) const {
  kernels::PoolGeometry g{s[0], s[1], s[2], s[3], kernel_, kernel_, stride_, stride_, padding_, padding_};
  if (!g.valid()) throw ShapeError("MaxPool2d input " + shape_string(s) + " is smaller than its window");
  return g;
}

Tensor MaxPool2d::forward(const Tensor& x, Phase phase) {
  require_nchw(x, "MaxPool2d");
  const auto g = geometry(x.shape());
  Tensor y({g.batch, g.channels, g.out_h(), g.out_w()});
  kernels::max_pool_forward(g, x.data(), y.data());
  if (phase == Phase::train) input_ = x;
  return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  require_cache(input_, "MaxPool2d");
  Tensor dx(input_.shape());
  kernels::max_pool_backward(geometry(input_.shape()), input_.data(), dy.data(), dx.data());
  return dx;
}

AvgPool2d::AvgPool2d(std::size_t kernel, std::size_t stride, std::size_t padding, bool count_include_pad)
    : kernel_(kernel), stride_(stride), padding_(padding), count_include_pad_(count_include_pad) {}

kernels::PoolGeometry AvgPool2d::geometry(const Shape& s) const {
  kernels::PoolGeometry g{s[0], s[1], s[2], s[3], kernel_, kernel_, stride_, stride_, padding_, padding_};
  if (!g.valid()) throw ShapeError("AvgPool2d input " + shape_string(s) + " is smaller than its window");
  return g;
}

Tensor AvgPool2d::forward(const Tensor& x, Phase phase) {
  require_nchw(x, "AvgPool2d");
  const auto g = geometry(x.shape());
  Tensor y({g.batch, g.channels, g.out_h(), g.out_w()});
  kernels::avg_pool_forward(g, count_include_pad_, x.data(), y.data());
  if (phase == Phase::train) input_shape_ = x.shape();
  return y;
}

Tensor AvgPool2d::backward(const Tensor& dy) {
  if (input_shape_.empty()) throw std::logic_error("AvgPool2d: backward before forward");
  Tensor dx(input_shape_);
  kernels::avg_pool_backward(geometry(input_shape_), count_include_pad_, dy.data(), dx.data());
  return dx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, Phase phase) {
  require_nchw(x, "GlobalAvgPool");
  const std::size_t planes = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor y({x.dim(0), x.dim(1), 1, 1});
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* src = x.data() + p * plane;
    Scalar s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += src[i];
    y[p] = s / static_cast<Scalar>(plane);
  }
  if (phase == Phase::train) input_shape_ = x.shape();
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
  if (input_shape_.empty()) throw std::logic_error("GlobalAvgPool: backward before forward");
  Tensor dx(input_shape_);
  const std::size_t planes = input_shape_[0] * input_shape_[1], plane = input_shape_[2] * input_shape_[3];
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar share = dy[p] / static_cast<Scalar>(plane);
    std::fill(dx.data() + p * plane, dx.data() + (p + 1) * plane, share);
  }
  return dx;
}

Tensor Flatten::forward(const Tensor& x, Phase phase) {
  if (phase == Phase::train) input_shape_ = x.shape();
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor Flatten::backward(const Tensor& dy) { return dy.reshaped(input_shape_); }

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_({out_features, in_features}),
      weight_grad_({out_features, in_features}),
      bias_({out_features}),
      bias_grad_({out_features}) {}

Tensor Dense::forward(const Tensor& x, Phase phase) {
  if (x.rank() != 2 || x.dim(1) != in_)
    throw ShapeError("Dense expects [N," + std::to_string(in_) + "], got " + shape_string(x.shape()));
  const std::size_t n = x.dim(0);
  Tensor y({n, out_});
  for (std::size_t b = 0; b < n; ++b) std::copy(bias_.data(), bias_.data() + out_, y.data() + b * out_);
  kernels::gemm(kernels::Trans::no, kernels::Trans::yes, n, out_, in_, 1.0, x.data(), in_, weight_.data(), in_, 1.0,
                y.data(), out_);
  if (phase == Phase::train) input_ = x;
  return y;
}

Tensor Dense::backward(const Tensor& dy) {
  require_cache(input_, "Dense");
  const std::size_t n = input_.dim(0);
  kernels::gemm(kernels::Trans::yes, kernels::Trans::no, out_, in_, n, 1.0, dy.data(), out_, input_.data(), in_, 0.0,
                weight_grad_.data(), in_);
  for (std::size_t o = 0; o < out_; ++o) {
    Scalar s = 0.0;
    for (std::size_t b = 0; b < n; ++b) s += dy[b * out_ + o];
    bias_grad_[o] = s;
  }
  Tensor dx({n, in_});
  kernels::gemm(kernels::Trans::no, kernels::Trans::no, n, in_, out_, 1.0, dy.data(), out_, weight_.data(), in_, 0.0,
                dx.data(), in_);
  return dx;
}

void Dense::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + "weight", &weight_, &weight_grad_, ParamRole::kernel, in_});
  out.push_back({prefix + "bias", &bias_, &bias_grad_, ParamRole::bias, 0});
}

}  // namespace numta::nn
