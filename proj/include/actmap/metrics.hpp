#pragma once

// Full-reference similarity metrics on pairs of equal-sized single-channel
// maps. Each metric takes an explicit dynamic range so that it can be used
// both on [0, 1] grayscale images and on unbounded activation maps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actmap/error.hpp"

namespace actmap {

/// Non-owning view of a row-major width x height map.
struct MapView {
  std::span<const float> data;
  std::size_t width = 0;
  std::size_t height = 0;

  MapView() = default;
  MapView(std::span<const float> values, std::size_t w, std::size_t h) : data(values), width(w), height(h) {
    if (values.size() != w * h) fail(ErrorKind::ShapeMismatch, "map data length != width * height");
  }

  float operator()(std::size_t x, std::size_t y) const { return data[y * width + x]; }
};

enum class MetricId { PSNR, SSIM, HaarPSI };

inline std::string_view to_string(MetricId id) {
  switch (id) {
    case MetricId::PSNR: return "psnr";
    case MetricId::SSIM: return "ssim";
    case MetricId::HaarPSI: return "haarpsi";
  }
  return "?";
}

inline MetricId parse_metric(std::string_view name) {
  if (name == "psnr") return MetricId::PSNR;
  if (name == "ssim") return MetricId::SSIM;
  if (name == "haarpsi") return MetricId::HaarPSI;
  fail(ErrorKind::Validation, "unknown metric '" + std::string(name) + "' (expected psnr|ssim|haarpsi)");
}

inline constexpr double kPsnrCapDb = 100.0;

/// Value a metric attains on identical inputs.
constexpr double metric_maximum(MetricId id) { return id == MetricId::PSNR ? kPsnrCapDb : 1.0; }

namespace detail {

inline void require_same_shape(const MapView& a, const MapView& b) {
  if (a.width != b.width || a.height != b.height) {
    fail(ErrorKind::ShapeMismatch, "maps differ in shape: " + std::to_string(a.width) + "x" +
                                       std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                       std::to_string(b.height));
  }
}

inline bool all_zero(const MapView& m) {
  return std::all_of(m.data.begin(), m.data.end(), [](float v) { return v == 0.0f; });
}

inline bool identical(const MapView& a, const MapView& b) { return std::ranges::equal(a.data, b.data); }

/// Plain double-precision grid used by the metric internals.
struct Grid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> v;

  Grid(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), v(w * h, fill) {}
  explicit Grid(const MapView& m) : width(m.width), height(m.height), v(m.data.begin(), m.data.end()) {}

  double& operator()(std::size_t x, std::size_t y) { return v[y * width + x]; }
  double operator()(std::size_t x, std::size_t y) const { return v[y * width + x]; }
};

}  // namespace detail

/// 10 log10(peak^2 / MSE), capped at 100 dB (the cap is also returned for MSE = 0).
inline double psnr(const MapView& a, const MapView& b, double peak) {
  detail::require_same_shape(a, b);
  if (!(peak > 0.0)) fail(ErrorKind::DomainError, "psnr peak must be > 0");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(peak * peak / mse));
}

struct SsimWindow {
  std::size_t size = 11;
  double sigma = 1.5;
};

/// Gaussian window actually used for a map of the given extent: 11x11 with
/// sigma 1.5, shrunk to the largest odd size that fits (sigma scaled along).
inline SsimWindow ssim_window_for(std::size_t width, std::size_t height) {
  const std::size_t extent = std::min(width, height);
  if (extent < 3) fail(ErrorKind::MapTooSmall, "ssim needs maps of at least 3x3");
  SsimWindow w;
  if (extent < 11) {
    w.size = extent % 2 == 1 ? extent : extent - 1;
    w.sigma = 1.5 * static_cast<double>(w.size) / 11.0;
  }
  return w;
}

/// Mean SSIM over every valid window position, with K1 = 0.01 and K2 = 0.03.
inline double ssim(const MapView& a, const MapView& b, double dynamic_range) {
  detail::require_same_shape(a, b);
  if (!(dynamic_range > 0.0)) fail(ErrorKind::DomainError, "ssim dynamic range must be > 0");
  const SsimWindow window = ssim_window_for(a.width, a.height);
  if (detail::all_zero(a) && detail::all_zero(b)) return 1.0;

  const std::size_t n = window.size;
  std::vector<double> kernel(n);
  const double center = static_cast<double>(n - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - center;
    kernel[i] = std::exp(-d * d / (2.0 * window.sigma * window.sigma));
    total += kernel[i];
  }
  for (double& k : kernel) k /= total;

  const std::size_t out_w = a.width - n + 1;
  const std::size_t out_h = a.height - n + 1;

  // Separable Gaussian filtering of a, b, a^2, b^2 and ab over valid positions.
  auto filter = [&](auto&& value) {
    detail::Grid horizontal(out_w, a.height);
    for (std::size_t y = 0; y < a.height; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += kernel[k] * value(x + k, y);
        horizontal(x, y) = s;
      }
    }
    detail::Grid out(out_w, out_h);
    for (std::size_t y = 0; y < out_h; ++y) {
      for (std::size_t x = 0; x < out_w; ++x) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += kernel[k] * horizontal(x, y + k);
        out(x, y) = s;
      }
    }
    return out;
  };

  const detail::Grid ga(a);
  const detail::Grid gb(b);
  const auto mu_a = filter([&](std::size_t x, std::size_t y) { return ga(x, y); });
  const auto mu_b = filter([&](std::size_t x, std::size_t y) { return gb(x, y); });
  const auto aa = filter([&](std::size_t x, std::size_t y) { return ga(x, y) * ga(x, y); });
  const auto bb = filter([&](std::size_t x, std::size_t y) { return gb(x, y) * gb(x, y); });
  const auto ab = filter([&](std::size_t x, std::size_t y) { return ga(x, y) * gb(x, y); });

  const double c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const double c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i];
    const double mb = mu_b.v[i];
    const double var_a = aa.v[i] - ma * ma;
    const double var_b = bb.v[i] - mb * mb;
    const double cov = ab.v[i] - ma * mb;
    sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
  }
  return sum / static_cast<double>(mu_a.v.size());
}

struct HaarPsiOptions {
  /// Stabilizer on the 0..255 scale; rescaled by (dynamic_range / 255)^2.
  double c = 30.0;
  double alpha = 4.2;
  /// Maps with min(width, height) below this skip the 2x mean subsampling.
  std::size_t subsample_min_extent = 16;
};

namespace detail {

// 2x2 mean filter (zero padding, anchored at the top-left tap) followed by
// keeping every second row and column.
inline Grid haar_subsample(const Grid& img) {
  Grid out((img.width + 1) / 2, (img.height + 1) / 2);
  for (std::size_t y = 0; y < out.height; ++y) {
    for (std::size_t x = 0; x < out.width; ++x) {
      double s = 0.0;
      for (std::size_t dy = 0; dy < 2; ++dy) {
        for (std::size_t dx = 0; dx < 2; ++dx) {
          const std::size_t sx = 2 * x + dx;
          const std::size_t sy = 2 * y + dy;
          if (sx < img.width && sy < img.height) s += img(sx, sy);
        }
      }
      out(x, y) = s / 4.0;
    }
  }
  return out;
}

// Absolute Haar responses at scale `level` (filter side 2^level, weight
// 2^-level, first half negated). `vertical_split` selects the filter whose
// sign flips across rows; otherwise across columns. Same-size output with
// zero padding; tap j of an m-wide filter reads offset j - (m - 1) / 2.
inline Grid haar_magnitude(const Grid& img, int level, bool vertical_split) {
  const std::size_t m = std::size_t{1} << level;
  const double scale = std::ldexp(1.0, -level);
  const auto anchor = static_cast<std::ptrdiff_t>((m - 1) / 2);
  const auto w = static_cast<std::ptrdiff_t>(img.width);
  const auto h = static_cast<std::ptrdiff_t>(img.height);
  const auto half = static_cast<std::ptrdiff_t>(m / 2);
  const auto len = static_cast<std::ptrdiff_t>(m);

  // Pass 1 sums along the constant direction, pass 2 applies the signs.
  Grid box(img.width, img.height);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (std::ptrdiff_t j = 0; j < len; ++j) {
        const std::ptrdiff_t sx = vertical_split ? x + j - anchor : x;
        const std::ptrdiff_t sy = vertical_split ? y : y + j - anchor;
        if (sx >= 0 && sx < w && sy >= 0 && sy < h) s += img(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
      }
      box(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = s;
    }
  }
  Grid out(img.width, img.height);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (std::ptrdiff_t j = 0; j < len; ++j) {
        const std::ptrdiff_t sx = vertical_split ? x : x + j - anchor;
        const std::ptrdiff_t sy = vertical_split ? y + j - anchor : y;
        if (sx < 0 || sx >= w || sy < 0 || sy >= h) continue;
        const double v = box(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
        s += j < half ? -v : v;
      }
      out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = std::abs(s * scale);
    }
  }
  return out;
}

}  // namespace detail

/// Haar wavelet-based perceptual similarity index for single-channel maps.
/// Local similarities come from the two finest Haar scales, pixel weights
/// from the third; both horizontal and vertical orientations contribute.
inline double haarpsi(const MapView& a, const MapView& b, double dynamic_range, const HaarPsiOptions& opt = {}) {
  detail::require_same_shape(a, b);
  if (!(dynamic_range > 0.0)) fail(ErrorKind::DomainError, "haarpsi dynamic range must be > 0");
  if (std::min(a.width, a.height) < 2) fail(ErrorKind::MapTooSmall, "haarpsi needs maps of at least 2x2");
  if (detail::identical(a, b)) return 1.0;

  detail::Grid ref(a);
  detail::Grid dist(b);
  if (std::min(a.width, a.height) >= opt.subsample_min_extent) {
    ref = detail::haar_subsample(ref);
    dist = detail::haar_subsample(dist);
  }

  const double scale = dynamic_range / 255.0;
  const double c = opt.c * scale * scale;
  auto logistic = [&](double x) { return 1.0 / (1.0 + std::exp(-opt.alpha * x)); };

  double weighted = 0.0;
  double weight_total = 0.0;
  for (bool vertical_split : {true, false}) {
    const auto r1 = detail::haar_magnitude(ref, 1, vertical_split);
    const auto r2 = detail::haar_magnitude(ref, 2, vertical_split);
    const auto r3 = detail::haar_magnitude(ref, 3, vertical_split);
    const auto d1 = detail::haar_magnitude(dist, 1, vertical_split);
    const auto d2 = detail::haar_magnitude(dist, 2, vertical_split);
    const auto d3 = detail::haar_magnitude(dist, 3, vertical_split);
    for (std::size_t i = 0; i < r1.v.size(); ++i) {
      const double s1 = (2.0 * r1.v[i] * d1.v[i] + c) / (r1.v[i] * r1.v[i] + d1.v[i] * d1.v[i] + c);
      const double s2 = (2.0 * r2.v[i] * d2.v[i] + c) / (r2.v[i] * r2.v[i] + d2.v[i] * d2.v[i] + c);
      const double local = (s1 + s2) / 2.0;
      const double weight = std::max(r3.v[i], d3.v[i]);
      weighted += logistic(local) * weight;
      weight_total += weight;
    }
  }
  if (weight_total == 0.0) return 1.0;
  const double mean = weighted / weight_total;
  const double inverse = std::log(mean / (1.0 - mean)) / opt.alpha;
  return std::clamp(inverse * inverse, 0.0, 1.0);
}

/// Range used when comparing two activation maps: the larger of the two
/// maxima, floored at 1e-6.
inline double activation_range(const MapView& a, const MapView& b) {
  float hi = 0.0f;
  for (float v : a.data) hi = std::max(hi, v);
  for (float v : b.data) hi = std::max(hi, v);
  return std::max(static_cast<double>(hi), 1e-6);
}

inline double compare(MetricId id, const MapView& a, const MapView& b, double range) {
  switch (id) {
    case MetricId::PSNR: return psnr(a, b, range);
    case MetricId::SSIM: return ssim(a, b, range);
    case MetricId::HaarPSI: return haarpsi(a, b, range);
  }
  return 0.0;
}

}  // namespace actmap
