#pragma once

// Seeded desk-scale IQA dataset: procedural reference images, each degraded
// by four distortion kinds at five levels, with a pseudo-MOS that falls
// linearly with level.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "actmap/dataset.hpp"
#include "actmap/error.hpp"
#include "actmap/image_io.hpp"
#include "actmap/rng.hpp"

namespace actmap::synthetic {

inline constexpr std::size_t kWidth = 128;
inline constexpr std::size_t kHeight = 96;
inline constexpr int kLevels = 5;

enum class DistortionKind { GaussianBlur, WhiteNoise, BlockQuantization, MeanShift };

inline constexpr std::array<DistortionKind, 4> kAllKinds{DistortionKind::GaussianBlur, DistortionKind::WhiteNoise,
                                                         DistortionKind::BlockQuantization,
                                                         DistortionKind::MeanShift};

inline const char* to_string(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::GaussianBlur: return "gaussian_blur";
    case DistortionKind::WhiteNoise: return "white_noise";
    case DistortionKind::BlockQuantization: return "jpeg_like_block_quantization";
    case DistortionKind::MeanShift: return "mean_shift";
  }
  return "?";
}

/// Level (1..5) to distortion parameter: blur sigma in pixels, noise standard
/// deviation, base quantization step, and additive shift, all on the [0, 1]
/// intensity scale. Strictly increasing in level.
inline double distortion_parameter(DistortionKind kind, int level) {
  static constexpr std::array<double, kLevels> blur{0.6, 1.0, 1.6, 2.4, 3.5};
  static constexpr std::array<double, kLevels> noise{0.015, 0.035, 0.06, 0.1, 0.15};
  static constexpr std::array<double, kLevels> quant{0.02, 0.05, 0.1, 0.18, 0.3};
  static constexpr std::array<double, kLevels> shift{0.04, 0.09, 0.15, 0.22, 0.3};
  if (level < 1 || level > kLevels) fail(ErrorKind::Validation, "distortion level must be in 1..5");
  const auto i = static_cast<std::size_t>(level - 1);
  switch (kind) {
    case DistortionKind::GaussianBlur: return blur[i];
    case DistortionKind::WhiteNoise: return noise[i];
    case DistortionKind::BlockQuantization: return quant[i];
    case DistortionKind::MeanShift: return shift[i];
  }
  return 0.0;
}

/// How strongly each kind lowers the pseudo-MOS per level.
inline double mos_slope(DistortionKind kind) {
  switch (kind) {
    case DistortionKind::GaussianBlur: return 0.8;
    case DistortionKind::WhiteNoise: return 0.9;
    case DistortionKind::BlockQuantization: return 0.7;
    case DistortionKind::MeanShift: return 0.5;
  }
  return 0.0;
}

/// 1 - slope * level / 5.
inline double pseudo_mos(DistortionKind kind, int level) {
  return 1.0 - mos_slope(kind) * static_cast<double>(level) / static_cast<double>(kLevels);
}

/// Planar float RGB image, values nominally in [0, 1].
struct Image {
  std::size_t width = kWidth;
  std::size_t height = kHeight;
  std::vector<float> v = std::vector<float>(kWidth * kHeight * 3, 0.0f);

  float& at(std::size_t x, std::size_t y, std::size_t c) { return v[(c * height + y) * width + x]; }
  float at(std::size_t x, std::size_t y, std::size_t c) const { return v[(c * height + y) * width + x]; }
};

namespace detail {

inline void blur_plane(std::vector<float>& plane, std::size_t w, std::size_t h, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[static_cast<std::size_t>(i + radius)];
  }
  for (double& kv : k) kv /= total;
  auto clampi = [](long v, long hi) { return static_cast<std::size_t>(std::clamp(v, 0L, hi)); };
  std::vector<float> tmp(plane.size());
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        s += k[static_cast<std::size_t>(i + radius)] * plane[y * w + clampi(static_cast<long>(x) + i, static_cast<long>(w) - 1)];
      }
      tmp[y * w + x] = static_cast<float>(s);
    }
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        s += k[static_cast<std::size_t>(i + radius)] * tmp[clampi(static_cast<long>(y) + i, static_cast<long>(h) - 1) * w + x];
      }
      plane[y * w + x] = static_cast<float>(s);
    }
  }
}

inline void for_each_plane(Image& img, auto&& fn) {
  const std::size_t n = img.width * img.height;
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<float> plane(img.v.begin() + static_cast<long>(c * n), img.v.begin() + static_cast<long>((c + 1) * n));
    fn(plane, c);
    std::copy(plane.begin(), plane.end(), img.v.begin() + static_cast<long>(c * n));
  }
}

// Orthonormal 8x8 DCT-II basis.
inline const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (std::size_t u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (std::size_t x = 0; x < 8; ++x) {
        b[u][x] = cu * std::cos((2.0 * static_cast<double>(x) + 1.0) * static_cast<double>(u) * std::numbers::pi / 16.0);
      }
    }
    return b;
  }();
  return basis;
}

inline void block_quantize_plane(std::vector<float>& plane, std::size_t w, std::size_t h, double step) {
  const auto& b = dct_basis();
  for (std::size_t by = 0; by + 8 <= h; by += 8) {
    for (std::size_t bx = 0; bx + 8 <= w; bx += 8) {
      double coef[8][8] = {};
      for (std::size_t u = 0; u < 8; ++u) {
        for (std::size_t v = 0; v < 8; ++v) {
          double s = 0.0;
          for (std::size_t y = 0; y < 8; ++y) {
            for (std::size_t x = 0; x < 8; ++x) s += b[u][y] * b[v][x] * plane[(by + y) * w + bx + x];
          }
          // Coarser steps for higher frequencies, as in JPEG luminance tables.
          const double q = step * (1.0 + 0.5 * static_cast<double>(u + v));
          coef[u][v] = std::round(s / q) * q;
        }
      }
      for (std::size_t y = 0; y < 8; ++y) {
        for (std::size_t x = 0; x < 8; ++x) {
          double s = 0.0;
          for (std::size_t u = 0; u < 8; ++u) {
            for (std::size_t v = 0; v < 8; ++v) s += b[u][y] * b[v][x] * coef[u][v];
          }
          plane[(by + y) * w + bx + x] = static_cast<float>(s);
        }
      }
    }
  }
}

}  // namespace detail

/// Procedural reference: colour gradient, rotated checkerboard, blurred noise
/// texture and a few disks, mixed with seed-dependent weights.
inline Image make_reference(std::uint64_t seed) {
  Rng rng(seed);
  Image img;
  const double w = static_cast<double>(img.width);
  const double h = static_cast<double>(img.height);

  std::array<double, 3> grad_lo{}, grad_hi{}, check_color{};
  for (std::size_t c = 0; c < 3; ++c) {
    grad_lo[c] = rng.uniform(0.05, 0.5);
    grad_hi[c] = rng.uniform(0.5, 0.95);
    check_color[c] = rng.uniform(0.3, 1.0);
  }
  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double check_angle = rng.uniform(0.0, std::numbers::pi / 2.0);
  const double cell = rng.uniform(6.0, 18.0);
  const double check_weight = rng.uniform(0.15, 0.35);
  const double texture_weight = rng.uniform(0.15, 0.35);

  std::vector<float> texture(img.width * img.height);
  for (float& t : texture) t = static_cast<float>(rng.normal());
  detail::blur_plane(texture, img.width, img.height, rng.uniform(1.0, 3.0));
  double tex_sd = 0.0;
  for (float t : texture) tex_sd += static_cast<double>(t) * t;
  tex_sd = std::sqrt(tex_sd / static_cast<double>(texture.size()));

  struct Disk {
    double cx, cy, r;
    std::array<double, 3> color;
  };
  std::vector<Disk> disks(3);
  for (auto& d : disks) {
    d.cx = rng.uniform(0.0, w);
    d.cy = rng.uniform(0.0, h);
    d.r = rng.uniform(6.0, 22.0);
    for (auto& col : d.color) col = rng.uniform(0.0, 1.0);
  }

  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double fx = static_cast<double>(x);
      const double fy = static_cast<double>(y);
      const double t = std::clamp(0.5 + ((fx - w / 2) * std::cos(angle) + (fy - h / 2) * std::sin(angle)) / w, 0.0, 1.0);
      const double u = fx * std::cos(check_angle) - fy * std::sin(check_angle);
      const double v = fx * std::sin(check_angle) + fy * std::cos(check_angle);
      const bool square = (static_cast<long>(std::floor(u / cell)) + static_cast<long>(std::floor(v / cell))) % 2 == 0;
      const double tex = texture[y * img.width + x] / tex_sd;
      for (std::size_t c = 0; c < 3; ++c) {
        double val = grad_lo[c] + t * (grad_hi[c] - grad_lo[c]);
        val = (1.0 - check_weight) * val + check_weight * (square ? check_color[c] : 1.0 - check_color[c]);
        val += texture_weight * 0.25 * tex;
        for (const auto& d : disks) {
          if ((fx - d.cx) * (fx - d.cx) + (fy - d.cy) * (fy - d.cy) < d.r * d.r) val = 0.5 * val + 0.5 * d.color[c];
        }
        img.at(x, y, c) = static_cast<float>(std::clamp(val, 0.0, 1.0));
      }
    }
  }
  return img;
}

inline Image distort(const Image& ref, DistortionKind kind, int level, std::uint64_t seed) {
  const double p = distortion_parameter(kind, level);
  Image out = ref;
  switch (kind) {
    case DistortionKind::GaussianBlur:
      detail::for_each_plane(out, [&](std::vector<float>& plane, std::size_t) {
        detail::blur_plane(plane, out.width, out.height, p);
      });
      break;
    case DistortionKind::WhiteNoise: {
      Rng rng(seed);
      for (float& v : out.v) v += static_cast<float>(p * rng.normal());
      break;
    }
    case DistortionKind::BlockQuantization:
      detail::for_each_plane(out, [&](std::vector<float>& plane, std::size_t) {
        detail::block_quantize_plane(plane, out.width, out.height, p);
      });
      break;
    case DistortionKind::MeanShift:
      for (float& v : out.v) v += static_cast<float>(p);
      break;
  }
  for (float& v : out.v) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

inline std::vector<std::uint8_t> to_bytes(const Image& img) {
  std::vector<std::uint8_t> bytes(img.width * img.height * 3);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        bytes[(y * img.width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(std::clamp(img.at(x, y, c), 0.0f, 1.0f) * 255.0f));
      }
    }
  }
  return bytes;
}

/// Writes refs/*.png, dist/*.png and manifest.csv under `out_dir`; returns
/// the manifest. Output depends only on (n_references, seed).
inline DatasetManifest generate_dataset(const std::filesystem::path& out_dir, std::size_t n_references,
                                        std::uint64_t seed) {
  if (n_references < 5) fail(ErrorKind::Validation, "generate_dataset needs at least 5 references");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "refs", ec);
  std::filesystem::create_directories(out_dir / "dist", ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.base_dir = out_dir;
  for (std::size_t r = 0; r < n_references; ++r) {
    char ref_id[32];
    std::snprintf(ref_id, sizeof ref_id, "ref%02zu", r + 1);
    const Image ref = make_reference(derive_seed(seed, r));
    const std::string ref_path = std::string("refs/") + ref_id + ".png";
    write_png(out_dir / ref_path, ref.width, ref.height, to_bytes(ref));
    for (std::size_t k = 0; k < kAllKinds.size(); ++k) {
      const DistortionKind kind = kAllKinds[k];
      for (int level = 1; level <= kLevels; ++level) {
        const std::string name = std::string(ref_id) + "_" + to_string(kind) + "_" + std::to_string(level);
        const std::uint64_t noise_seed = derive_seed(derive_seed(seed, r), 100 + k * 10 + static_cast<std::size_t>(level));
        const Image dist = distort(ref, kind, level, noise_seed);
        const std::string dist_path = "dist/" + name + ".png";
        write_png(out_dir / dist_path, dist.width, dist.height, to_bytes(dist));
        manifest.rows.push_back({name, ref_id, ref_path, dist_path, pseudo_mos(kind, level), to_string(kind), level});
      }
    }
  }
  write_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace actmap::synthetic
