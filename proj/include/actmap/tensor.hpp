#pragma once

// Dense rank-3 tensors and the forward operators needed to run a
// conv/relu/maxpool/lrn network on an arbitrary-resolution image.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "actmap/error.hpp"

namespace actmap {

/// W x H x D activation volume. Storage is channel-major, then row-major:
/// element (x, y, c) lives at (c * height + y) * width + x.
class Tensor {
 public:
  Tensor() = default;

  Tensor(std::size_t width, std::size_t height, std::size_t depth, float fill = 0.0f)
      : width_(width), height_(height), depth_(depth), data_(checked_size(width, height, depth), fill) {}

  Tensor(std::size_t width, std::size_t height, std::size_t depth, std::vector<float> data)
      : width_(width), height_(height), depth_(depth), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height, depth)) {
      fail(ErrorKind::ShapeMismatch, "tensor data length " + std::to_string(data_.size()) + " != W*H*D");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t plane_size() const noexcept { return width_ * height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& operator()(std::size_t x, std::size_t y, std::size_t c) { return data_[(c * height_ + y) * width_ + x]; }
  float operator()(std::size_t x, std::size_t y, std::size_t c) const {
    return data_[(c * height_ + y) * width_ + x];
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  std::span<float> channel(std::size_t c) { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> channel(std::size_t c) const { return {data_.data() + c * plane_size(), plane_size()}; }

  bool same_shape(const Tensor& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && depth_ == other.depth_;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t checked_size(std::size_t w, std::size_t h, std::size_t d) {
    if (w < 1 || h < 1 || d < 1) fail(ErrorKind::ShapeMismatch, "tensor dimensions must be >= 1");
    return w * h * d;
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t depth_ = 0;
  std::vector<float> data_;
};

struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t groups = 1;
  /// out x (in / groups) x kh x kw
  std::vector<float> weights;
  std::vector<float> bias;

  std::size_t weight_count() const { return out_channels * (in_channels / groups) * kernel_h * kernel_w; }

  void validate() const {
    if (in_channels < 1 || out_channels < 1 || kernel_h < 1 || kernel_w < 1) {
      fail(ErrorKind::ShapeMismatch, "conv dimensions must be >= 1");
    }
    if (stride < 1) fail(ErrorKind::ShapeMismatch, "conv stride must be >= 1");
    if (groups < 1 || in_channels % groups != 0 || out_channels % groups != 0) {
      fail(ErrorKind::ShapeMismatch, "conv groups must divide in and out channels");
    }
    if (weights.size() != weight_count()) {
      fail(ErrorKind::ShapeMismatch, "conv weights length " + std::to_string(weights.size()) + ", expected " +
                                         std::to_string(weight_count()));
    }
    if (bias.size() != out_channels) fail(ErrorKind::ShapeMismatch, "conv bias length must equal out_channels");
  }
};

struct PoolSpec {
  std::size_t window = 2;
  std::size_t stride = 2;
};

struct LrnSpec {
  std::size_t size = 5;
  double alpha = 1e-4;
  double beta = 0.75;
  double k = 1.0;
};

namespace detail {

inline std::size_t output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad,
                                 const char* what) {
  const std::ptrdiff_t span = static_cast<std::ptrdiff_t>(in + 2 * pad) - static_cast<std::ptrdiff_t>(kernel);
  if (span < 0) {
    fail(ErrorKind::DegenerateOutput, std::string(what) + ": input extent " + std::to_string(in) +
                                          " too small for window " + std::to_string(kernel));
  }
  return static_cast<std::size_t>(span) / stride + 1;
}

}  // namespace detail

/// Zero-padded (optionally grouped) 2-D convolution. Accumulates in float in
/// (in-channel, kernel-row, kernel-column) order.
inline Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
  spec.validate();
  if (input.depth() != spec.in_channels) {
    fail(ErrorKind::ShapeMismatch, "conv2d expects " + std::to_string(spec.in_channels) + " channels, got " +
                                       std::to_string(input.depth()));
  }
  const std::size_t out_w = detail::output_extent(input.width(), spec.kernel_w, spec.stride, spec.padding, "conv2d");
  const std::size_t out_h = detail::output_extent(input.height(), spec.kernel_h, spec.stride, spec.padding, "conv2d");

  Tensor out(out_w, out_h, spec.out_channels);
  const std::size_t in_per_group = spec.in_channels / spec.groups;
  const std::size_t out_per_group = spec.out_channels / spec.groups;
  const auto in_w = static_cast<std::ptrdiff_t>(input.width());
  const auto in_h = static_cast<std::ptrdiff_t>(input.height());
  const auto pad = static_cast<std::ptrdiff_t>(spec.padding);
  const std::size_t kernel_area = spec.kernel_h * spec.kernel_w;

  for (std::size_t oc = 0; oc < spec.out_channels; ++oc) {
    const std::size_t group = oc / out_per_group;
    const float* filter = spec.weights.data() + oc * in_per_group * kernel_area;
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(oy * spec.stride) - pad;
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(ox * spec.stride) - pad;
        float acc = 0.0f;
        for (std::size_t ic = 0; ic < in_per_group; ++ic) {
          const std::span<const float> plane = input.channel(group * in_per_group + ic);
          const float* w = filter + ic * kernel_area;
          for (std::size_t ky = 0; ky < spec.kernel_h; ++ky) {
            const std::ptrdiff_t y = y0 + static_cast<std::ptrdiff_t>(ky);
            if (y < 0 || y >= in_h) continue;
            const float* row = plane.data() + y * in_w;
            const float* wrow = w + ky * spec.kernel_w;
            for (std::size_t kx = 0; kx < spec.kernel_w; ++kx) {
              const std::ptrdiff_t x = x0 + static_cast<std::ptrdiff_t>(kx);
              if (x < 0 || x >= in_w) continue;
              acc += wrow[kx] * row[x];
            }
          }
        }
        out(ox, oy, oc) = spec.bias[oc] + acc;
      }
    }
  }
  return out;
}

inline Tensor relu(Tensor input) {
  for (float& v : input.data()) v = std::max(v, 0.0f);
  return input;
}

inline Tensor maxpool(const Tensor& input, const PoolSpec& spec) {
  if (spec.window < 1 || spec.stride < 1) fail(ErrorKind::ShapeMismatch, "pool window and stride must be >= 1");
  const std::size_t out_w = detail::output_extent(input.width(), spec.window, spec.stride, 0, "maxpool");
  const std::size_t out_h = detail::output_extent(input.height(), spec.window, spec.stride, 0, "maxpool");
  Tensor out(out_w, out_h, input.depth());
  for (std::size_t c = 0; c < input.depth(); ++c) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        float best = input(ox * spec.stride, oy * spec.stride, c);
        for (std::size_t dy = 0; dy < spec.window; ++dy) {
          for (std::size_t dx = 0; dx < spec.window; ++dx) {
            best = std::max(best, input(ox * spec.stride + dx, oy * spec.stride + dy, c));
          }
        }
        out(ox, oy, c) = best;
      }
    }
  }
  return out;
}

/// Cross-channel local response normalization:
/// x / (k + alpha / n * sum of x^2 over the n-channel window) ^ beta,
/// the window truncated at the first and last channel.
inline Tensor lrn(const Tensor& input, const LrnSpec& spec) {
  if (spec.size < 1 || spec.size % 2 == 0) fail(ErrorKind::ShapeMismatch, "lrn size must be odd");
  Tensor out(input.width(), input.height(), input.depth());
  const std::size_t half = spec.size / 2;
  const std::size_t plane = input.plane_size();
  const std::size_t depth = input.depth();
  const auto in = input.data();
  auto dst = out.data();
  const float scale = static_cast<float>(spec.alpha / static_cast<double>(spec.size));
  for (std::size_t c = 0; c < depth; ++c) {
    const std::size_t lo = c >= half ? c - half : 0;
    const std::size_t hi = std::min(depth - 1, c + half);
    for (std::size_t i = 0; i < plane; ++i) {
      float sq = 0.0f;
      for (std::size_t j = lo; j <= hi; ++j) {
        const float v = in[j * plane + i];
        sq += v * v;
      }
      const float denom = std::pow(static_cast<float>(spec.k) + scale * sq, static_cast<float>(spec.beta));
      dst[c * plane + i] = in[c * plane + i] / denom;
    }
  }
  return out;
}

}  // namespace actmap
